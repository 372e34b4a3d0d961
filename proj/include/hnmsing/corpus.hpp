#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hnmsing/hnm.hpp"
#include "hnmsing/segmentation.hpp"

namespace hnmsing {

inline constexpr int kCorpusFormatVersion = 1;

// Unit database: one JSON document per syllable plus manifest.json.
struct Corpus {
  std::map<std::string, SyllableUnit> units;

  const SyllableUnit& unit(const std::string& pinyin) const;
};

std::string unit_to_json(const SyllableUnit& unit);
SyllableUnit unit_from_json(std::string_view text);

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

// One labelled recording listed in an analysis manifest.
struct CorpusRecording {
  std::filesystem::path audio;
  std::filesystem::path labels;
  std::optional<int> key;  // nominal MIDI key, used as octave guide
};

std::vector<CorpusRecording> load_recording_manifest(const std::filesystem::path& path);

struct CorpusAnalysisOptions {
  SegmentOptions segment;
  AnalysisOptions hnm;
  int jobs = 1;
};

// Every labelled syllable of the recording becomes a unit.
std::vector<SyllableUnit> analyze_recording(const Signal& signal, const SegmentLabels& labels,
                                            std::optional<int> key,
                                            CorpusAnalysisOptions options = {});

}  // namespace hnmsing
