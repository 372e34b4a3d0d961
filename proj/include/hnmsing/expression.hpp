#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hnmsing/pitch.hpp"
#include "hnmsing/score.hpp"
#include "hnmsing/segmentation.hpp"
#include "hnmsing/signal_io.hpp"

namespace hnmsing {

inline constexpr int kExpressionFormatVersion = 1;

// Expression parameters of one sung syllable. Curves and segment spans are
// relative to the syllable start; t_v and the note times are absolute.
struct ExpressionParams {
  std::string lyric;
  MergedNote note;
  PitchCurve pitch;
  EnergyCurve energy;
  double unvoiced_peak = 0.0;
  SyllableSegmentation segmentation;
  double t_v = 0.0;
  double onset_dev = 0.0;
  // Repetition of the previous syllable's vowel, declared in the label file.
  bool sliding = false;

  std::int64_t length() const noexcept { return segmentation.end(); }
};

struct ExpressionSource {
  std::string audio;
  std::string score;
};

struct ExpressionDocument {
  int format_version = kExpressionFormatVersion;
  ExpressionSource source;
  int sample_rate = kSampleRate;
  int frame_len = kFrameLen;
  int hop = kHop;
  std::vector<ExpressionParams> syllables;
};

struct ExtractOptions {
  SegmentOptions segment;
  FrameParams frames;
  int jobs = 1;
};

// Label syllables pair with the scored syllables in order; sliding label
// syllables attach to the preceding scored note.
ExpressionDocument extract_expression(const Signal& signal, std::span<const ScoredSyllable> score,
                                      const SegmentLabels& labels, ExtractOptions options = {});

std::string expression_to_json(const ExpressionDocument& doc);
ExpressionDocument expression_from_json(std::string_view text);
void save_expression(const ExpressionDocument& doc, const std::filesystem::path& path);
ExpressionDocument load_expression(const std::filesystem::path& path);

bool operator==(const ExpressionParams& a, const ExpressionParams& b);
bool operator==(const ExpressionDocument& a, const ExpressionDocument& b);

}  // namespace hnmsing
