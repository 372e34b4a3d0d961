#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hnmsing/segmentation.hpp"
#include "hnmsing/signal_io.hpp"

namespace hnmsing {

// Formant-like envelope used by the synthetic voice (linear amplitude).
double synthetic_envelope(double freq_hz);

// One sung syllable of a synthetic recording.
struct SungSyllable {
  std::string pinyin;
  double vowel_onset_s = 0.0;
  double vowel_s = 0.4;
  double f0 = 220.0;
  double vibrato_cents = 0.0;
  double vibrato_hz = 5.5;
  double gain = 1.0;
  double end_gain = 1.0;  // linear gain ramp across the vowel
};

struct SyntheticRecording {
  Signal signal;
  SegmentLabels labels;
};

// Initial consonant length the generator uses for a pinyin syllable.
double synthetic_initial_s(const std::string& pinyin);

SyntheticRecording make_recording(const std::vector<SungSyllable>& syllables, double total_s,
                                  std::uint64_t seed);

// Writes the demo data set: corpus recording + labels + analysis manifest,
// toy score (MIDI + lyrics), and a sung rendition of the score with labels.
struct DemoPaths {
  std::filesystem::path corpus_manifest;
  std::filesystem::path score;
  std::filesystem::path lyrics;
  std::filesystem::path song;
  std::filesystem::path song_labels;
};

DemoPaths write_demo_set(const std::filesystem::path& dir, std::uint64_t seed = 0);

}  // namespace hnmsing
