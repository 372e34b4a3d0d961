#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hnmsing/signal_io.hpp"

namespace hnmsing {

// Half-open sample interval [begin, end).
struct Span {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t length() const noexcept { return end - begin; }
  bool contains(const Span& o) const noexcept { return begin <= o.begin && o.end <= end; }
  friend bool operator==(const Span&, const Span&) = default;
};

enum class SegmentKind { Syllable, Initial, Attack, Sustain, Release, NasalEnd };

std::string_view to_string(SegmentKind kind) noexcept;

struct LabelEntry {
  Span span;
  SegmentKind kind = SegmentKind::Syllable;
  std::string text;

  friend bool operator==(const LabelEntry&, const LabelEntry&) = default;
};

struct SegmentLabels {
  std::vector<LabelEntry> entries;  // sorted by start, syllables before their sub-entries

  friend bool operator==(const SegmentLabels&, const SegmentLabels&) = default;
};

// C_x, A, S, R, C_n spans (relative to the syllable origin) and the vowel onset.
struct SyllableSegmentation {
  std::optional<Span> cx;
  Span a, s, r;
  std::optional<Span> cn;
  double t_v = 0.0;

  std::int64_t begin() const noexcept { return cx ? cx->begin : a.begin; }
  std::int64_t end() const noexcept { return cn ? cn->end : r.end; }
  std::int64_t length() const noexcept { return end() - begin(); }
  // Present spans in order cx, a, s, r, cn.
  std::vector<Span> spans() const;
  // True when the spans tile [begin, end) in order.
  bool contiguous() const noexcept;

  friend bool operator==(const SyllableSegmentation&, const SyllableSegmentation&) = default;
};

enum class InitialCategory { Stop, Fricative, Nasal, Glide, Null };

std::string_view to_string(InitialCategory c) noexcept;

SegmentLabels parse_labels(std::string_view text);
std::string serialize_labels(const SegmentLabels& labels);

InitialCategory classify_initial(std::string_view pinyin);

struct AsrParams {
  double threshold_factor = 0.8;
  double cap_fraction = 0.4;
};

// Frame-level A-S-R decision on an envelope: number of attack and release frames.
struct AsrFrames {
  std::size_t attack = 0;
  std::size_t release = 0;
};
AsrFrames asr_frames(const std::vector<double>& envelope, AsrParams params = {});

struct AsrSpans {
  Span a, s, r;
};

// envelope is a max-amplitude curve computed over the vowel samples themselves.
AsrSpans asr_segment(Span vowel, const EnergyCurve& envelope, AsrParams params = {});

struct RefineParams {
  double window_s = 0.030;
};

std::int64_t refine_boundary(const Signal& signal, std::int64_t approx, InitialCategory category,
                             RefineParams params = {});

// Per-frame features used by refine_boundary (exposed for tests and dumps).
std::vector<double> spectral_flux(std::span<const double> samples, int frame_len = kFrameLen,
                                  int hop = kHop);
std::vector<double> spectral_variance(std::span<const double> samples, int frame_len = kFrameLen,
                                      int hop = kHop);
std::vector<double> zero_crossings(std::span<const double> samples, int frame_len = kFrameLen,
                                   int hop = kHop);

inline double onset_deviation(double t_v, double t_m) noexcept { return t_v - t_m; }

// One labelled syllable with its sub-entries, as found in a label file.
struct LabeledSyllable {
  Span span;  // absolute samples
  std::string text;
  std::optional<Span> initial, attack, sustain, release, nasal_end;  // absolute
  bool sliding = false;  // text prefixed with '-': repetition of the previous vowel
};

std::vector<LabeledSyllable> group_syllables(const SegmentLabels& labels);

struct SegmentOptions {
  AsrParams asr;
  RefineParams refine;
  bool refine_initial = true;
};

// Builds the C_x/A/S/R/C_n segmentation of one labelled syllable: refines the
// initial/vowel boundary for the initial's category and derives A-S-R from the
// vowel envelope whenever the label file does not supply all three. Spans are
// relative to syl.span.begin; t_v is absolute seconds.
SyllableSegmentation segment_syllable(const Signal& signal, const LabeledSyllable& syl,
                                      InitialCategory category, SegmentOptions options = {});

}  // namespace hnmsing
