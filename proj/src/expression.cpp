#include "hnmsing/expression.hpp"

#include <algorithm>
#include <cmath>

#include "fileio.hpp"
#include "hnmsing/error.hpp"
#include "json_util.hpp"
#include "parallel.hpp"

namespace hnmsing {
namespace {

using detail::json;
using detail::Node;

struct Pairing {
  const LabeledSyllable* label;
  std::size_t note_index;  // index into score
};

std::vector<Pairing> pair_labels(std::span<const LabeledSyllable> labels,
                                 std::span<const ScoredSyllable> score) {
  std::vector<Pairing> out;
  std::size_t next = 0;
  for (const auto& l : labels) {
    if (l.sliding) {
      if (next == 0) {
        throw Error(ErrorKind::LabelScoreMismatch,
                    "sliding syllable '" + l.text + "' has no preceding note");
      }
      out.push_back({&l, next - 1});
      continue;
    }
    if (next >= score.size()) break;
    out.push_back({&l, next++});
  }
  const auto plain = static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](const auto& l) { return !l.sliding; }));
  if (plain != score.size()) {
    throw Error(ErrorKind::LabelScoreMismatch, std::to_string(plain) + " labelled syllables vs " +
                                                   std::to_string(score.size()) +
                                                   " scored syllables");
  }
  return out;
}

// The syllable's own note, stretched over the whole slice so every frame has a guide.
MergedNote guide_note(const MergedNote& note, double begin_s, double end_s) {
  MergedNote g = note;
  if (g.sub_notes.empty()) return g;
  g.sub_notes.front().onset_s = std::min(g.sub_notes.front().onset_s, begin_s);
  g.sub_notes.back().offset_s = std::max(g.sub_notes.back().offset_s, end_s);
  return g;
}

MergedNote sliding_note(const MergedNote& parent, double t_v) {
  MergedNote n = parent;
  n.sub_notes.clear();
  for (const auto& s : parent.sub_notes) {
    if (s.offset_s > t_v) n.sub_notes.push_back(s);
  }
  if (n.sub_notes.empty() && !parent.sub_notes.empty()) n.sub_notes.push_back(parent.sub_notes.back());
  n.t_on = t_v;
  n.portamento = n.sub_notes.size() > 1;
  return n;
}

ExpressionParams extract_one(const Signal& signal, const LabeledSyllable& syl,
                             const ScoredSyllable& scored, const ExtractOptions& options) {
  const int sr = signal.sample_rate;
  const double begin_s = static_cast<double>(syl.span.begin) / sr;
  const double end_s = static_cast<double>(syl.span.end) / sr;
  if (!syl.sliding && (scored.note.t_off <= begin_s || scored.note.t_on >= end_s)) {
    throw Error(ErrorKind::UnlabeledSyllable,
                "no label covers the note of '" + scored.lyric + "' at " +
                    std::to_string(scored.note.t_on) + " s");
  }
  if (!syl.sliding && syl.text != scored.lyric) {
    throw Error(ErrorKind::LabelScoreMismatch,
                "label '" + syl.text + "' paired with lyric '" + scored.lyric + "'");
  }

  ExpressionParams p;
  p.lyric = syl.text;
  p.sliding = syl.sliding;
  const auto category = syl.sliding ? InitialCategory::Null : classify_initial(syl.text);
  p.segmentation = segment_syllable(signal, syl, category, options.segment);
  p.t_v = p.segmentation.t_v;
  p.note = syl.sliding ? sliding_note(scored.note, p.t_v) : scored.note;

  Signal slice;
  slice.sample_rate = sr;
  slice.samples.assign(signal.samples.begin() + syl.span.begin,
                       signal.samples.begin() + syl.span.end);
  if (slice.size() < static_cast<std::size_t>(options.frames.frame_len)) {
    throw Error(ErrorKind::SpanTooShort, "syllable '" + syl.text + "' shorter than one frame");
  }
  const auto n_frames =
      frame_count(slice.size(), options.frames.frame_len, options.frames.hop);
  const MergedNote guide[] = {guide_note(p.note, begin_s, end_s)};
  const auto keys = guide_from_notes(guide, n_frames, begin_s, options.frames, sr);
  p.pitch = extract_pitch_curve(slice, keys, options.frames);
  p.energy = frame_energy_curve(slice, options.frames.frame_len, options.frames.hop);

  if (p.segmentation.cx &&
      (category == InitialCategory::Stop || category == InitialCategory::Fricative)) {
    const auto cx = *p.segmentation.cx;
    for (auto i = cx.begin; i < cx.end; ++i) {
      p.unvoiced_peak = std::max(p.unvoiced_peak, std::abs(slice.samples[static_cast<std::size_t>(i)]));
    }
  }
  p.onset_dev = onset_deviation(p.t_v, p.note.t_on);
  return p;
}

json pitch_json(const PitchCurve& c) {
  json f0 = json::array();
  for (const auto& v : c.frames) f0.push_back(v ? json(*v) : json(nullptr));
  return {{"hop_s", c.hop_s}, {"start_s", c.start_s}, {"f0", std::move(f0)}};
}

json note_json(const MergedNote& n) {
  json keys = json::array();
  json subs = json::array();
  for (const auto& s : n.sub_notes) {
    keys.push_back(s.key);
    subs.push_back({{"key", s.key}, {"onset_s", s.onset_s}, {"offset_s", s.offset_s}});
  }
  return {{"keys", std::move(keys)},
          {"sub_notes", std::move(subs)},
          {"t_on", n.t_on},
          {"t_off", n.t_off},
          {"portamento", n.portamento}};
}

MergedNote note_from(const Node& n) {
  MergedNote note;
  note.t_on = n.at("t_on").number();
  note.t_off = n.at("t_off").number();
  note.portamento = n.at("portamento").boolean();
  if (note.t_off < note.t_on) detail::schema_error(n.pointer() + "/t_off", "t_off before t_on");
  const auto keys = n.at("keys");
  if (keys.array_size() == 0) detail::schema_error(keys.pointer(), "a note needs at least one key");
  if (n.has("sub_notes")) {
    const auto subs = n.at("sub_notes");
    if (subs.array_size() != keys.array_size()) {
      detail::schema_error(subs.pointer(), "sub_notes and keys differ in length");
    }
    for (std::size_t i = 0; i < subs.array_size(); ++i) {
      const auto s = subs.at(i);
      SubNote sub{static_cast<int>(s.at("key").integer()), s.at("onset_s").number(),
                  s.at("offset_s").number()};
      if (sub.key != keys.at(i).integer()) {
        detail::schema_error(keys.at(i).pointer(), "key differs from sub_notes");
      }
      note.sub_notes.push_back(sub);
    }
  } else {
    // Keys only: spread them evenly over the note.
    const auto k = keys.array_size();
    const double step = (note.t_off - note.t_on) / static_cast<double>(k);
    for (std::size_t i = 0; i < k; ++i) {
      note.sub_notes.push_back({static_cast<int>(keys.at(i).integer()),
                                note.t_on + step * static_cast<double>(i),
                                note.t_on + step * static_cast<double>(i + 1)});
    }
  }
  for (const auto& s : note.sub_notes) {
    if (s.key < 0 || s.key > 127) detail::schema_error(keys.pointer(), "key outside 0..127");
  }
  return note;
}

std::size_t expected_frames(std::int64_t length, int frame_len, int hop) {
  if (length < frame_len) return 0;
  return static_cast<std::size_t>((length - frame_len) / hop) + 1;
}

bool same_hop(double hop_s, int hop, int sr) {
  const double want = static_cast<double>(hop) / sr;
  return std::abs(hop_s - want) <= 1e-9 * want;
}

ExpressionParams syllable_from(const Node& n, const ExpressionDocument& doc) {
  ExpressionParams p;
  p.lyric = n.at("lyric").string();
  p.note = note_from(n.at("note"));
  p.segmentation = detail::segments_from(n.at("segments"));
  p.t_v = n.at("t_v").number();
  p.segmentation.t_v = p.t_v;
  p.onset_dev = n.at("onset_dev").number();
  p.unvoiced_peak = n.at("unvoiced_peak").non_negative();
  if (n.has("sliding")) p.sliding = n.at("sliding").boolean();

  const auto frames = expected_frames(p.segmentation.end(), doc.frame_len, doc.hop);

  const auto pitch = n.at("pitch");
  p.pitch.hop_s = pitch.at("hop_s").number();
  p.pitch.start_s = pitch.at("start_s").number();
  if (!same_hop(p.pitch.hop_s, doc.hop, doc.sample_rate)) {
    detail::schema_error(pitch.pointer() + "/hop_s", "hop differs from the analysis hop");
  }
  const auto f0 = pitch.at("f0");
  if (f0.array_size() != frames) {
    detail::schema_error(f0.pointer(), "expected " + std::to_string(frames) +
                                           " frames for the syllable duration, got " +
                                           std::to_string(f0.array_size()));
  }
  for (std::size_t i = 0; i < frames; ++i) {
    const auto v = f0.at(i);
    if (v.raw().is_null()) {
      p.pitch.frames.emplace_back();
    } else {
      const double hz = v.number();
      if (!(hz > 0.0)) detail::schema_error(v.pointer(), "f0 must be positive or null");
      p.pitch.frames.emplace_back(hz);
    }
  }

  const auto energy = n.at("energy");
  const double ehop = energy.at("hop_s").number();
  if (!same_hop(ehop, doc.hop, doc.sample_rate)) {
    detail::schema_error(energy.pointer() + "/hop_s", "hop differs from the analysis hop");
  }
  p.energy = EnergyCurve{doc.hop, doc.frame_len, {}, CurveKind::FrameEnergy};
  const auto values = energy.at("values");
  if (values.array_size() != frames) {
    detail::schema_error(values.pointer(), "expected " + std::to_string(frames) +
                                               " frames for the syllable duration, got " +
                                               std::to_string(values.array_size()));
  }
  for (std::size_t i = 0; i < frames; ++i) p.energy.values.push_back(values.at(i).non_negative());
  return p;
}

bool same_curve(const EnergyCurve& a, const EnergyCurve& b) {
  return a.hop_samples == b.hop_samples && a.frame_len_samples == b.frame_len_samples &&
         a.kind == b.kind && a.values == b.values;
}

}  // namespace

bool operator==(const ExpressionParams& a, const ExpressionParams& b) {
  return a.lyric == b.lyric && a.note == b.note && a.pitch == b.pitch &&
         same_curve(a.energy, b.energy) && a.unvoiced_peak == b.unvoiced_peak &&
         a.segmentation == b.segmentation && a.t_v == b.t_v && a.onset_dev == b.onset_dev &&
         a.sliding == b.sliding;
}

bool operator==(const ExpressionDocument& a, const ExpressionDocument& b) {
  return a.format_version == b.format_version && a.source.audio == b.source.audio &&
         a.source.score == b.source.score && a.sample_rate == b.sample_rate &&
         a.frame_len == b.frame_len && a.hop == b.hop && a.syllables == b.syllables;
}

ExpressionDocument extract_expression(const Signal& signal, std::span<const ScoredSyllable> score,
                                      const SegmentLabels& labels, ExtractOptions options) {
  require_pipeline_rate(signal);
  const auto grouped = group_syllables(labels);
  const auto pairs = pair_labels(grouped, score);

  ExpressionDocument doc;
  doc.sample_rate = signal.sample_rate;
  doc.frame_len = options.frames.frame_len;
  doc.hop = options.frames.hop;
  doc.syllables.resize(pairs.size());
  detail::parallel_for(pairs.size(), options.jobs, [&](std::size_t i) {
    doc.syllables[i] = extract_one(signal, *pairs[i].label, score[pairs[i].note_index], options);
  });
  for (std::size_t i = 1; i < doc.syllables.size(); ++i) {
    if (!(doc.syllables[i].note.t_on > doc.syllables[i - 1].note.t_on)) {
      throw Error(ErrorKind::LabelScoreMismatch,
                  "syllable " + std::to_string(i) + " does not follow its predecessor in time");
    }
  }
  return doc;
}

std::string expression_to_json(const ExpressionDocument& doc) {
  json syllables = json::array();
  for (const auto& p : doc.syllables) {
    json s = {{"lyric", p.lyric},
              {"note", note_json(p.note)},
              {"pitch", pitch_json(p.pitch)},
              {"energy",
               {{"hop_s", static_cast<double>(p.energy.hop_samples) / doc.sample_rate},
                {"values", p.energy.values}}},
              {"unvoiced_peak", p.unvoiced_peak},
              {"segments", detail::segments_json(p.segmentation)},
              {"t_v", p.t_v},
              {"onset_dev", p.onset_dev}};
    if (p.sliding) s["sliding"] = true;
    syllables.push_back(std::move(s));
  }
  const json j = {
      {"format_version", doc.format_version},
      {"source", {{"audio", doc.source.audio}, {"score", doc.source.score}}},
      {"analysis", {{"sample_rate", doc.sample_rate}, {"frame_len", doc.frame_len}, {"hop", doc.hop}}},
      {"syllables", std::move(syllables)}};
  return j.dump(1) + "\n";
}

ExpressionDocument expression_from_json(std::string_view text) {
  const json j = detail::parse_json(text);
  const Node root(j, "");
  ExpressionDocument doc;
  doc.format_version = static_cast<int>(root.at("format_version").integer());
  if (doc.format_version != kExpressionFormatVersion) {
    throw Error(ErrorKind::UnknownVersion,
                "expression format_version " + std::to_string(doc.format_version));
  }
  const auto source = root.at("source");
  doc.source.audio = source.at("audio").string();
  doc.source.score = source.at("score").string();
  if (root.has("analysis")) {
    const auto a = root.at("analysis");
    doc.sample_rate = static_cast<int>(a.at("sample_rate").integer());
    doc.frame_len = static_cast<int>(a.at("frame_len").integer());
    doc.hop = static_cast<int>(a.at("hop").integer());
    if (doc.sample_rate <= 0 || doc.frame_len <= 0 || doc.hop <= 0) {
      detail::schema_error(a.pointer(), "analysis parameters must be positive");
    }
  }
  const auto syllables = root.at("syllables");
  for (std::size_t i = 0; i < syllables.array_size(); ++i) {
    doc.syllables.push_back(syllable_from(syllables.at(i), doc));
  }
  return doc;
}

void save_expression(const ExpressionDocument& doc, const std::filesystem::path& path) {
  detail::write_text_file(path, expression_to_json(doc));
}

ExpressionDocument load_expression(const std::filesystem::path& path) {
  return expression_from_json(detail::read_text_file(path));
}

}  // namespace hnmsing
