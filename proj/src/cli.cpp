#include "hnmsing/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "fileio.hpp"
#include "hnmsing/corpus.hpp"
#include "hnmsing/error.hpp"
#include "hnmsing/expression.hpp"
#include "hnmsing/pitch.hpp"
#include "hnmsing/score.hpp"
#include "hnmsing/synthetic.hpp"

namespace hnmsing {
namespace {

struct HelpRequested {
  std::string text;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<ScoredSyllable> load_score(const RunPlan& plan) {
  const auto smf = read_smf(plan.score.string(), plan.melody_channel);
  const auto merged = merge_portamento(smf.notes, smf.tempo);
  const auto words = parse_lyrics(detail::read_text_file(plan.lyrics));
  return attach_lyrics(merged, words);
}

std::vector<std::filesystem::path> declared_outputs(const RunPlan& plan) {
  switch (plan.command) {
    case Command::ExtractExpression:
    case Command::Resynth:
    case Command::AnalyzeCorpus:
    case Command::MakeSynthetic:
      return {plan.out};
    case Command::Synthesize:
      return {plan.out, plan.controls_csv};
    case Command::DumpCurves:
      return {plan.pitch_csv, plan.energy_csv};
    case Command::ScoreDump:
      break;
  }
  return {};
}

void score_dump(const RunPlan& plan, std::ostream& out) {
  const auto smf = read_smf(plan.score.string(), plan.melody_channel);
  const auto merged = merge_portamento(smf.notes, smf.tempo);
  std::vector<std::string> lyrics;
  if (!plan.lyrics.empty()) {
    const auto words = parse_lyrics(detail::read_text_file(plan.lyrics));
    for (const auto& s : attach_lyrics(merged, words)) lyrics.push_back(s.lyric);
  }
  out << "index,lyric,keys,t_on,t_off,portamento\n";
  for (std::size_t i = 0; i < merged.size(); ++i) {
    std::string keys;
    for (const auto& s : merged[i].sub_notes) {
      keys += (keys.empty() ? "" : "+") + std::to_string(s.key);
    }
    out << i << ',' << (i < lyrics.size() ? lyrics[i] : "") << ',' << keys << ','
        << num(merged[i].t_on) << ',' << num(merged[i].t_off) << ','
        << (merged[i].portamento ? "true" : "false") << '\n';
  }
}

void analyze_corpus(const RunPlan& plan, std::ostream& out, std::ostream& err) {
  CorpusAnalysisOptions options;
  options.hnm.cepstral_order = plan.cepstral_order;
  options.segment.asr.threshold_factor = plan.asr_threshold;
  options.jobs = plan.jobs;
  Corpus corpus;
  for (const auto& rec : load_recording_manifest(plan.manifest)) {
    const auto signal = read_wav(rec.audio);
    const auto labels = parse_labels(detail::read_text_file(rec.labels));
    for (auto& unit : analyze_recording(signal, labels, rec.key, options)) {
      const auto name = unit.pinyin;
      if (!corpus.units.emplace(name, std::move(unit)).second) {
        err << "warning: duplicate unit '" << name << "' in " << rec.labels.string()
            << " ignored\n";
      }
    }
  }
  save_corpus(corpus, plan.out);
  out << "units " << corpus.units.size() << '\n';
}

void extract(const RunPlan& plan, std::ostream& out) {
  const auto signal = read_wav(plan.audio);
  const auto score = load_score(plan);
  const auto labels = parse_labels(detail::read_text_file(plan.labels));
  ExtractOptions options;
  options.frames.hop = plan.hop;
  options.segment.asr.threshold_factor = plan.asr_threshold;
  options.jobs = plan.jobs;
  auto doc = extract_expression(signal, score, labels, options);
  doc.source = {plan.audio.string(), plan.score.string()};
  save_expression(doc, plan.out);
  out << "syllables " << doc.syllables.size() << '\n';
}

void synthesize(const RunPlan& plan, std::ostream& out, std::ostream& err) {
  const auto score = load_score(plan);
  const auto corpus = load_corpus(plan.corpus);
  std::optional<ExpressionDocument> doc;
  if (plan.mode == SynthMode::Expressive) doc = load_expression(plan.expression);
  PhraseOptions options;
  options.mode = plan.mode;
  options.seed = plan.seed;
  options.jobs = plan.jobs;
  options.render.plan = plan.plan;
  options.render.transpose = plan.transpose;
  options.render.extension_ratio = plan.crossfade_ratio;
  options.render.extension_cap_s = plan.crossfade_cap_ms / 1000.0;
  options.render.fricative_overlap_s = plan.fricative_overlap_ms / 1000.0;
  const auto result = synthesize_phrase(score, corpus, doc ? &*doc : nullptr, options);
  for (const auto& w : result.join.warnings) err << "warning: " << w << '\n';
  write_wav(result.join.signal, plan.out);
  if (!plan.controls_csv.empty()) write_control_csv(result, plan.controls_csv);
  out << "mode " << (plan.mode == SynthMode::Plain ? "plain" : "expressive") << "\nsamples "
      << result.join.signal.size() << "\njoins";
  for (auto k : result.join.kinds) out << ' ' << to_string(k);
  out << '\n';
}

std::vector<std::optional<double>> constant_guide(const Signal& s, std::optional<int> key,
                                                  const FrameParams& params) {
  if (!key || s.size() < static_cast<std::size_t>(params.frame_len)) return {};
  return std::vector<std::optional<double>>(frame_count(s.size(), params.frame_len, params.hop),
                                            key_to_hz(*key));
}

void resynth(const RunPlan& plan, std::ostream& out, std::ostream& err) {
  const auto signal = read_wav(plan.audio);
  const auto guide = constant_guide(signal, plan.key, FrameParams{});
  const auto pitch = extract_pitch_curve(signal, guide);
  AnalysisOptions options;
  options.cepstral_order = plan.cepstral_order;
  auto y = resynthesize(signal, pitch, plan.seed, options);

  double num_e = 0.0, den_e = 0.0;
  const std::size_t edge = kFrameLen;
  for (std::size_t i = edge; i + edge < signal.size(); ++i) {
    num_e += signal.samples[i] * signal.samples[i];
    den_e += (signal.samples[i] - y.samples[i]) * (signal.samples[i] - y.samples[i]);
  }
  double peak = 0.0;
  for (double v : y.samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    err << "warning: resynthesis peak " << num(peak) << " scaled to 1\n";
    for (double& v : y.samples) v /= peak;
  }
  write_wav(y, plan.out);
  const double snr = den_e > 0.0 ? 10.0 * std::log10(num_e / den_e) : INFINITY;
  out << "snr_db " << num(snr) << '\n';
}

void dump_curves(const RunPlan& plan, std::ostream& out) {
  const auto signal = read_wav(plan.audio);
  require_pipeline_rate(signal);
  const FrameParams params{kFrameLen, plan.hop};
  std::vector<std::optional<double>> guide;
  if (!plan.score.empty()) {
    const auto smf = read_smf(plan.score.string(), plan.melody_channel);
    const auto merged = merge_portamento(smf.notes, smf.tempo);
    guide = guide_from_notes(merged, frame_count(signal.size(), params.frame_len, params.hop), 0.0,
                             params, signal.sample_rate);
  } else {
    guide = constant_guide(signal, plan.key, params);
  }
  const auto pitch = extract_pitch_curve(signal, guide, params);
  const auto energy = frame_energy_curve(signal, params.frame_len, params.hop);

  std::ostringstream p;
  p << "time_s,f0_hz\n";
  for (std::size_t i = 0; i < pitch.frames.size(); ++i) {
    p << num(pitch.time_at(i)) << ',' << (pitch.frames[i] ? num(*pitch.frames[i]) : "") << '\n';
  }
  std::ostringstream e;
  e << "time_s,value\n";
  for (std::size_t i = 0; i < energy.values.size(); ++i) {
    e << num(pitch.time_at(i)) << ',' << num(energy.values[i]) << '\n';
  }
  detail::write_text_file(plan.pitch_csv, p.str());
  detail::write_text_file(plan.energy_csv, e.str());
  out << "frames " << pitch.frames.size() << '\n';
}

void make_synthetic(const RunPlan& plan, std::ostream& out) {
  const auto paths = write_demo_set(plan.out, plan.seed);
  out << "corpus_manifest " << paths.corpus_manifest.string() << "\nscore " << paths.score.string()
      << "\nlyrics " << paths.lyrics.string() << "\nsong " << paths.song.string()
      << "\nsong_labels " << paths.song_labels.string() << '\n';
}

}  // namespace

RunPlan parse_args(const std::vector<std::string>& args) {
  RunPlan plan;
  CLI::App app{"Singing voice analysis and HNM synthesis", "hnmsing"};
  app.require_subcommand(1);

  std::string mode;
  std::string plan_mode = "absorb";
  std::optional<int> key;

  auto* dump = app.add_subcommand("score-dump", "Print the merged notes of a MIDI score");
  dump->add_option("--score", plan.score, "Standard MIDI file")->required();
  dump->add_option("--lyrics", plan.lyrics, "Lyrics text (one pinyin syllable per note)");
  dump->add_option("--melody-channel", plan.melody_channel, "MIDI channel of the melody")
      ->check(CLI::Range(0, 15));

  auto* corpus = app.add_subcommand("analyze-corpus", "Build the unit database from labelled recordings");
  corpus->add_option("--manifest", plan.manifest, "Recording manifest JSON")->required();
  corpus->add_option("--out", plan.out, "Output corpus directory")->required();

  auto* ext = app.add_subcommand("extract-expression", "Extract expression parameters from a recording");
  ext->add_option("--audio", plan.audio, "Sung recording (WAV)")->required();
  ext->add_option("--score", plan.score, "Standard MIDI file")->required();
  ext->add_option("--lyrics", plan.lyrics, "Lyrics text")->required();
  ext->add_option("--labels", plan.labels, "Segment label file")->required();
  ext->add_option("--out", plan.out, "Expression JSON")->required();
  ext->add_option("--melody-channel", plan.melody_channel, "MIDI channel of the melody")
      ->check(CLI::Range(0, 15));

  auto* syn = app.add_subcommand("synthesize", "Render a phrase from the corpus");
  syn->add_option("--score", plan.score, "Standard MIDI file")->required();
  syn->add_option("--lyrics", plan.lyrics, "Lyrics text")->required();
  syn->add_option("--corpus", plan.corpus, "Corpus directory")->envname("HNMSING_CORPUS")->required();
  syn->add_option("--out", plan.out, "Output WAV")->required();
  syn->add_option("--expression", plan.expression, "Expression JSON (expressive mode)");
  syn->add_option("--mode", mode, "expressive or plain")
      ->check(CLI::IsMember({"expressive", "plain"}));
  syn->add_option("--transpose", plan.transpose, "Transpose by k semitones");
  syn->add_option("--melody-channel", plan.melody_channel, "MIDI channel of the melody")
      ->check(CLI::Range(0, 15));
  syn->add_option("--plan", plan_mode, "Plain duration plan: absorb or proportional")
      ->check(CLI::IsMember({"absorb", "proportional"}));
  syn->add_option("--crossfade-ratio", plan.crossfade_ratio, "Extension as a fraction of the segment")
      ->check(CLI::Range(0.0, 1.0));
  syn->add_option("--crossfade-cap-ms", plan.crossfade_cap_ms, "Extension cap in ms")
      ->check(CLI::Range(0.0, 1000.0));
  syn->add_option("--fricative-overlap-ms", plan.fricative_overlap_ms, "Fricative overlap in ms")
      ->check(CLI::Range(0.0, 1000.0));
  syn->add_option("--dump-controls", plan.controls_csv, "Write control points as CSV");

  auto* res = app.add_subcommand("resynth", "Analyse a WAV and resynthesise it");
  res->add_option("--in", plan.audio, "Input WAV")->required();
  res->add_option("--out", plan.out, "Output WAV")->required();

  auto* curves = app.add_subcommand("dump-curves", "Write pitch and energy curves as CSV");
  curves->add_option("--in", plan.audio, "Input WAV")->required();
  curves->add_option("--pitch", plan.pitch_csv, "Pitch CSV")->required();
  curves->add_option("--energy", plan.energy_csv, "Energy CSV")->required();
  curves->add_option("--score", plan.score, "Optional MIDI score used as octave guide");
  curves->add_option("--melody-channel", plan.melody_channel, "MIDI channel of the melody")
      ->check(CLI::Range(0, 15));

  auto* demo = app.add_subcommand("make-synthetic", "Write the synthetic demo corpus, score and song");
  demo->add_option("--out", plan.out, "Output directory")->required();

  for (auto* sub : {corpus, ext, syn}) {
    sub->add_option("--jobs", plan.jobs, "Worker threads")->check(CLI::Range(1, 64));
  }
  for (auto* sub : {corpus, res}) {
    sub->add_option("--cepstral-order", plan.cepstral_order, "Noise cepstrum order")
        ->check(CLI::Range(1, 64));
  }
  for (auto* sub : {corpus, ext}) {
    sub->add_option("--asr-threshold", plan.asr_threshold, "A-S-R threshold factor")
        ->check(CLI::Range(0.0, 1.0));
  }
  for (auto* sub : {ext, curves}) {
    sub->add_option("--hop", plan.hop, "Analysis hop in samples")->check(CLI::Range(1, 4410));
  }
  for (auto* sub : {res, curves}) {
    sub->add_option("--key", key, "Nominal MIDI key used as octave guide")->check(CLI::Range(0, 127));
  }
  for (auto* sub : {syn, res, demo}) {
    sub->add_option("--seed", plan.seed, "Noise seed");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested{app.help()};
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested{app.help("", CLI::AppFormatMode::All)};
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::Usage, e.what());
  }

  const auto* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  if (name == "score-dump") plan.command = Command::ScoreDump;
  if (name == "analyze-corpus") plan.command = Command::AnalyzeCorpus;
  if (name == "extract-expression") plan.command = Command::ExtractExpression;
  if (name == "synthesize") plan.command = Command::Synthesize;
  if (name == "resynth") plan.command = Command::Resynth;
  if (name == "dump-curves") plan.command = Command::DumpCurves;
  if (name == "make-synthetic") plan.command = Command::MakeSynthetic;

  plan.key = key;
  plan.plan = plan_mode == "proportional" ? PlanMode::Proportional : PlanMode::AbsorbInSustain;
  if (plan.command == Command::Synthesize) {
    if (mode.empty()) mode = plan.expression.empty() ? "plain" : "expressive";
    plan.mode = mode == "plain" ? SynthMode::Plain : SynthMode::Expressive;
    if (plan.mode == SynthMode::Expressive && plan.expression.empty()) {
      throw Error(ErrorKind::Usage, "--expression is required for --mode expressive");
    }
  }
  return plan;
}

int execute(const RunPlan& plan, std::ostream& out, std::ostream& err) {
  std::vector<std::filesystem::path> created;
  for (const auto& p : declared_outputs(plan)) {
    if (!p.empty() && !std::filesystem::exists(p)) created.push_back(p);
  }
  try {
    switch (plan.command) {
      case Command::ScoreDump: score_dump(plan, out); break;
      case Command::AnalyzeCorpus: analyze_corpus(plan, out, err); break;
      case Command::ExtractExpression: extract(plan, out); break;
      case Command::Synthesize: synthesize(plan, out, err); break;
      case Command::Resynth: resynth(plan, out, err); break;
      case Command::DumpCurves: dump_curves(plan, out); break;
      case Command::MakeSynthetic: make_synthetic(plan, out); break;
    }
    return 0;
  } catch (const std::exception& e) {
    std::error_code ec;
    for (const auto& p : created) std::filesystem::remove_all(p, ec);
    err << "error: " << e.what() << '\n';
    if (const auto* he = dynamic_cast<const Error*>(&e)) return exit_code(he->kind());
    return 3;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  RunPlan plan;
  try {
    plan = parse_args(args);
  } catch (const HelpRequested& h) {
    out << h.text;
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\nrun with --help for usage\n";
    return exit_code(e.kind());
  }
  return execute(plan, out, err);
}

}  // namespace hnmsing
