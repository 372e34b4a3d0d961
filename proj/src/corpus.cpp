#include "hnmsing/corpus.hpp"

#include <cmath>

#include "fileio.hpp"
#include "hnmsing/error.hpp"
#include "hnmsing/pitch.hpp"
#include "hnmsing/score.hpp"
#include "json_util.hpp"
#include "parallel.hpp"

namespace hnmsing {
namespace {

using detail::json;
using detail::Node;

void check_version(const Node& root, const char* what) {
  const auto v = root.at("format_version").integer();
  if (v != kCorpusFormatVersion) {
    throw Error(ErrorKind::UnknownVersion, std::string(what) + " format_version " + std::to_string(v));
  }
}

HnmFrame frame_from(const Node& n) {
  HnmFrame f;
  f.time_s = n.at("t").number();
  f.f0 = n.at("f0").non_negative();
  f.mvf = n.at("mvf").non_negative();
  const auto h = n.at("h");
  for (std::size_t k = 0; k < h.array_size(); ++k) {
    const auto pair = h.at(k);
    if (pair.array_size() != 2) detail::schema_error(pair.pointer(), "expected [amplitude, phase]");
    f.harmonics.push_back({pair.at(std::size_t{0}).non_negative(), pair.at(std::size_t{1}).number()});
  }
  const auto ceps = n.at("ceps");
  for (std::size_t q = 0; q < ceps.array_size(); ++q) f.noise_ceps.push_back(ceps.at(q).number());
  if (f.voiced() ? f.harmonics.size() != harmonic_count(f.mvf, f.f0)
                 : (f.mvf != 0.0 || !f.harmonics.empty())) {
    detail::schema_error(h.pointer(), "harmonic count does not match mvf / f0");
  }
  return f;
}

}  // namespace

const SyllableUnit& Corpus::unit(const std::string& pinyin) const {
  const auto it = units.find(pinyin);
  if (it == units.end()) throw Error(ErrorKind::MissingUnit, "no corpus unit for '" + pinyin + "'");
  return it->second;
}

std::string unit_to_json(const SyllableUnit& unit) {
  json frames = json::array();
  for (const auto& f : unit.frames) {
    json h = json::array();
    for (const auto& x : f.harmonics) h.push_back(json::array({x.amplitude, x.phase}));
    frames.push_back({{"t", f.time_s}, {"f0", f.f0}, {"mvf", f.mvf}, {"h", std::move(h)},
                      {"ceps", f.noise_ceps}});
  }
  const json j = {{"format_version", kCorpusFormatVersion},
                  {"pinyin", unit.pinyin},
                  {"sample_rate", unit.sample_rate},
                  {"hop", unit.hop},
                  {"length", unit.length},
                  {"segments", detail::segments_json(unit.segmentation)},
                  {"t_v", unit.segmentation.t_v},
                  {"frames", std::move(frames)}};
  return j.dump() + "\n";
}

SyllableUnit unit_from_json(std::string_view text) {
  const json j = detail::parse_json(text);
  const Node root(j, "");
  check_version(root, "unit");
  SyllableUnit u;
  u.pinyin = root.at("pinyin").string();
  u.sample_rate = static_cast<int>(root.at("sample_rate").integer());
  u.hop = static_cast<int>(root.at("hop").integer());
  u.length = root.at("length").integer();
  if (u.sample_rate <= 0 || u.hop <= 0 || u.length <= 0) {
    detail::schema_error("", "sample_rate, hop and length must be positive");
  }
  u.segmentation = detail::segments_from(root.at("segments"));
  u.segmentation.t_v = root.at("t_v").number();
  if (u.segmentation.begin() < 0 || u.segmentation.end() > u.length) {
    detail::schema_error("/segments", "segments exceed the unit length");
  }
  const auto frames = root.at("frames");
  if (frames.array_size() == 0) detail::schema_error(frames.pointer(), "unit has no frames");
  for (std::size_t i = 0; i < frames.array_size(); ++i) u.frames.push_back(frame_from(frames.at(i)));
  return u;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  json units = json::object();
  for (const auto& [pinyin, unit] : corpus.units) {
    const std::string file = pinyin + ".json";
    detail::write_text_file(dir / file, unit_to_json(unit));
    units[pinyin] = file;
  }
  const json manifest = {{"format_version", kCorpusFormatVersion}, {"units", std::move(units)}};
  detail::write_text_file(dir / "manifest.json", manifest.dump(1) + "\n");
}

Corpus load_corpus(const std::filesystem::path& dir) {
  const json j = detail::parse_json(detail::read_text_file(dir / "manifest.json"));
  const Node root(j, "");
  check_version(root, "manifest");
  const auto units = root.at("units");
  if (!units.raw().is_object()) detail::schema_error(units.pointer(), "expected object");
  Corpus c;
  for (const auto& [pinyin, file] : units.raw().items()) {
    const Node entry(file, units.pointer() + "/" + pinyin);
    auto unit = unit_from_json(detail::read_text_file(dir / entry.string()));
    if (unit.pinyin != pinyin) {
      detail::schema_error(entry.pointer(), "unit file holds '" + unit.pinyin + "'");
    }
    c.units.emplace(pinyin, std::move(unit));
  }
  return c;
}

std::vector<CorpusRecording> load_recording_manifest(const std::filesystem::path& path) {
  const json j = detail::parse_json(detail::read_text_file(path));
  const Node root(j, "");
  check_version(root, "recording manifest");
  const auto base = path.parent_path();
  const auto list = root.at("recordings");
  std::vector<CorpusRecording> out;
  for (std::size_t i = 0; i < list.array_size(); ++i) {
    const auto r = list.at(i);
    CorpusRecording rec{base / r.at("audio").string(), base / r.at("labels").string(), {}};
    if (r.has("key")) rec.key = static_cast<int>(r.at("key").integer());
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<SyllableUnit> analyze_recording(const Signal& signal, const SegmentLabels& labels,
                                            std::optional<int> key,
                                            CorpusAnalysisOptions options) {
  require_pipeline_rate(signal);
  std::vector<std::optional<double>> guide;
  if (key) {
    guide.assign(frame_count(signal.size(), kFrameLen, kHop), key_to_hz(*key));
  }
  const auto pitch = extract_pitch_curve(signal, guide);
  const auto syllables = group_syllables(labels);
  std::vector<SyllableUnit> units(syllables.size());
  detail::parallel_for(syllables.size(), options.jobs, [&](std::size_t i) {
    const auto& syl = syllables[i];
    const auto seg = segment_syllable(signal, syl, classify_initial(syl.text), options.segment);
    units[i] = analyze_syllable(signal, syl, seg, pitch, options.hnm);
  });
  return units;
}

}  // namespace hnmsing
