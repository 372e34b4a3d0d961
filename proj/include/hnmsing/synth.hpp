#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hnmsing/corpus.hpp"
#include "hnmsing/expression.hpp"
#include "hnmsing/hnm.hpp"
#include "hnmsing/pitch.hpp"
#include "hnmsing/score.hpp"
#include "hnmsing/segmentation.hpp"

namespace hnmsing {

// Piecewise-affine map from target samples to source samples, one piece per
// segment present on both sides.
struct TimeMap {
  std::vector<std::pair<Span, Span>> pairs;  // (source, target)

  // Inside the target range only; outside it the map continues at unit slope.
  double map_to_source(double t_target) const;
  Span target() const noexcept { return {pairs.front().second.begin, pairs.back().second.end}; }
};

TimeMap build_time_map(const SyllableSegmentation& source, const SyllableSegmentation& target);

enum class PlanMode { AbsorbInSustain, Proportional };

// Plain (score-only) target segmentation starting at sample 0.
SyllableSegmentation plan_plain_targets(const ScoredSyllable& syllable, const SyllableUnit& unit,
                                        PlanMode mode = PlanMode::AbsorbInSustain);

std::vector<std::int64_t> place_control_points(std::int64_t target_len);

HnmFrame sample_hnm_at(const SyllableUnit& unit, const TimeMap& map, double t_target);

// Resamples the amplitude and unwrapped-phase envelopes at multiples of target_f0.
HnmFrame retune_frame(const HnmFrame& frame, double target_f0);

struct ShiftedCurve {
  PitchCurve curve;
  std::vector<bool> out_of_range;  // per frame, voiced values outside [60, 500]
};

ShiftedCurve pitch_shift_curve(const PitchCurve& curve, int semitones);

enum class SynthMode { Expressive, Plain };
enum class JoinKind { VoicedTransition, FricativeOverlap, Pause };

std::string_view to_string(JoinKind kind) noexcept;

struct ControlRecord {
  std::size_t index = 0;
  std::int64_t sample = 0;  // within RenderedSyllable::samples
  double f0 = 0.0;
  double gain = 1.0;
};

// Samples are laid out as [head extension | target segmentation | tail extension].
struct RenderedSyllable {
  Signal samples;
  std::int64_t vowel_onset_sample = 0;
  std::int64_t pre_roll_samples = 0;
  std::int64_t head_ext = 0;
  std::int64_t tail_ext = 0;
  std::int64_t fricative_ext = 0;  // part of head_ext that may overlap the previous syllable
  SyllableSegmentation segmentation;  // target spans, relative to the core start
  std::int64_t origin = 0;  // core start on the expression's syllable timeline
  InitialCategory initial = InitialCategory::Null;
  JoinKind join_prev = JoinKind::Pause;
  JoinKind join_next = JoinKind::Pause;
  std::vector<ControlRecord> controls;

  std::int64_t core_length() const noexcept { return segmentation.length(); }
};

struct RenderOptions {
  PlanMode plan = PlanMode::AbsorbInSustain;
  int transpose = 0;
  double extension_ratio = 0.10;
  double extension_cap_s = 0.050;
  double fricative_overlap_s = 0.020;
};

// Score-only parameters: planned segmentation, vowel onset on the note-on.
ExpressionParams plain_expression(const ScoredSyllable& syllable, const SyllableUnit& unit,
                                  PlanMode mode = PlanMode::AbsorbInSustain);

RenderedSyllable render_syllable(const SyllableUnit& unit, const ExpressionParams& expr,
                                 SynthMode mode, std::uint64_t noise_seed,
                                 const RenderOptions& options = {});

void apply_dynamics(RenderedSyllable& rendered, const ExpressionParams& expr);

struct JoinResult {
  Signal signal;
  std::vector<JoinKind> kinds;  // between syllable i and i + 1
  std::int64_t front_pad = 0;
  std::vector<std::int64_t> starts;  // first sample of each rendered buffer in signal
  std::vector<std::string> warnings;
};

JoinResult join_syllables(std::vector<RenderedSyllable>& rendered,
                          std::span<const ExpressionParams> exprs);

struct PhraseOptions {
  SynthMode mode = SynthMode::Plain;
  RenderOptions render;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct PhraseResult {
  JoinResult join;
  std::vector<RenderedSyllable> syllables;
  std::vector<ExpressionParams> exprs;
};

// Expressive mode requires `expression`; plain mode ignores it.
PhraseResult synthesize_phrase(std::span<const ScoredSyllable> score, const Corpus& corpus,
                               const ExpressionDocument* expression, const PhraseOptions& options);

void write_control_csv(const PhraseResult& result, const std::filesystem::path& path);

}  // namespace hnmsing
