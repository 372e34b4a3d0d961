// One line per criterion; exit status is the number of failures.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "hnmsing/cli.hpp"
#include "hnmsing/corpus.hpp"
#include "hnmsing/expression.hpp"
#include "hnmsing/hnm.hpp"
#include "hnmsing/pitch.hpp"
#include "hnmsing/score.hpp"
#include "hnmsing/synth.hpp"
#include "hnmsing/synthetic.hpp"

using namespace hnmsing;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Signal sine(double f, double amp, std::size_t n, double phase = 0.0) {
  Signal s;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = amp * std::sin(kTwoPi * f * i / kSampleRate + phase);
  return s;
}

Signal partials(double f0, std::vector<double> amps, std::size_t n) {
  Signal s;
  s.samples.assign(n, 0.0);
  for (std::size_t k = 0; k < amps.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      s.samples[i] += amps[k] * std::cos(kTwoPi * f0 * (k + 1) * i / kSampleRate + 0.3 * k);
    }
  }
  return s;
}

fs::path work_dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / ("hnmsing_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

// 1: lag search against a plain scan over every integer lag
Outcome pitch_oracle() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> frames;
  for (int i = 0; i < 200; ++i) {
    const double f0 = 65.0 + 430.0 * u(rng);
    std::vector<double> x(kFrameLen, 0.0);
    const int nh = 1 + static_cast<int>(6 * u(rng));
    for (int k = 1; k <= nh; ++k) {
      const double a = u(rng) / k, ph = kTwoPi * u(rng);
      for (int t = 0; t < kFrameLen; ++t) x[t] += a * std::cos(kTwoPi * f0 * k * t / kSampleRate + ph);
    }
    const double noise = 0.3 * u(rng);
    for (auto& v : x) v += noise * g(rng);
    frames.push_back(std::move(x));
  }
  const auto t0 = Clock::now();
  std::vector<int> got;
  for (const auto& f : frames) got.push_back(decide_pitch(lag_scores(f, kSampleRate), kSampleRate).lag);
  const double secs = since(t0);

  int match = 0;
  const int lo = (kSampleRate + 499) / 500, hi = kSampleRate / 60;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::vector<double> x = frames[i];
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    for (auto& v : x) v -= mean;
    int best = lo;
    double best_score = -1e300;
    for (int k = lo; k <= hi; ++k) {
      double r = 0.0, m = 0.0;
      for (int t = 0; t + k < kFrameLen; ++t) {
        r += x[t] * x[t + k];
        m += std::abs(x[t] - x[t + k]);
      }
      m /= (kFrameLen - k);
      if (r / (m + 1.0) > best_score) {
        best_score = r / (m + 1.0);
        best = k;
      }
    }
    match += best == got[i];
  }
  return {match == 200 && secs < 5.0, fmt("%d/200 lags identical, %.3f s", match, secs)};
}

// 2: sines and white noise
Outcome pitch_accuracy() {
  std::string detail;
  bool ok = true;
  for (double f : {110.0, 220.0, 440.0}) {
    const auto c = extract_pitch_curve(sine(f, 0.5, kSampleRate));
    std::size_t good = 0;
    for (const auto& v : c.frames) good += v && std::abs(*v - f) <= 2.5;
    const double frac = static_cast<double>(good) / c.frames.size();
    ok = ok && frac >= 0.95;
    detail += fmt("%g Hz %.1f%%, ", f, 100 * frac);
  }
  Signal noise;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-0.3, 0.3);
  for (int i = 0; i < kSampleRate; ++i) noise.samples.push_back(d(rng));
  const auto c = extract_pitch_curve(noise);
  const double uv = 1.0 - static_cast<double>(c.voiced_count()) / c.frames.size();
  ok = ok && uv >= 0.90;
  detail += fmt("noise %.1f%% unvoiced", 100 * uv);
  return {ok, detail};
}

// 3: six pitches, guides an octave down, level and up, each 3% sharp and flat
Outcome octave_correction() {
  int resolved = 0;
  for (double f0 : {125.0, 150.0, 175.0, 200.0, 225.0, 245.0}) {
    const auto s = partials(f0, {0.4, 0.15, 0.05}, kSampleRate / 2);
    const auto n = frame_count(s.size(), kFrameLen, kHop);
    for (double octave : {0.5, 1.0, 2.0}) {
      for (double detune : {0.97, 1.03}) {
        const double guide = f0 * octave * detune;
        const auto c = extract_pitch_curve(s, std::vector<std::optional<double>>(n, guide));
        std::size_t right = 0;
        for (const auto& v : c.frames) right += v && std::abs(std::log2(*v / guide)) < 0.5;
        const bool direct = std::abs(std::log2(correct_octave(f0, guide) / guide)) < 0.5;
        resolved += direct && right >= static_cast<std::size_t>(0.95 * n);
      }
    }
  }
  return {resolved == 36, fmt("%d/36 combinations resolve to the guide octave", resolved)};
}

ControlPointGrid grid_over(std::span<const HnmFrame> frames, std::int64_t n) {
  ControlPointGrid g;
  g.positions = place_control_points(n);
  for (auto p : g.positions) g.frames.push_back(interpolate_frames(frames, static_cast<double>(p) / kSampleRate));
  return g;
}

double snr_db(std::span<const double> ref, std::span<const double> test, std::size_t edge) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = edge; i + edge < ref.size(); ++i) {
    num += ref[i] * ref[i];
    den += (ref[i] - test[i]) * (ref[i] - test[i]);
  }
  return 10.0 * std::log10(num / std::max(den, 1e-300));
}

// 4: analyse then synthesise a steady three-harmonic tone
Outcome codec() {
  const auto s = partials(220.0, {0.4, 0.2, 0.1}, kSampleRate);
  const auto t0 = Clock::now();
  const auto pitch = extract_pitch_curve(s);
  const auto frames = analyze_span(s, Span{0, kSampleRate}, pitch);
  const auto y = synthesize_stream(grid_over(frames, kSampleRate), s.size(), 0);
  const double secs = since(t0);
  const double snr = snr_db(s.samples, y.samples, kFrameLen);
  return {snr >= 25.0 && secs < 2.0, fmt("SNR %.2f dB, %.3f s", snr, secs)};
}

// 5: semitone shifts
Outcome transpose() {
  PitchCurve c;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(60.0, 500.0);
  for (int i = 0; i < 500; ++i) c.frames.push_back(i % 7 == 3 ? std::nullopt : std::optional<double>(u(rng)));
  const auto up = pitch_shift_curve(c, 12).curve;
  const auto composed = pitch_shift_curve(pitch_shift_curve(c, 3).curve, 4).curve;
  const auto direct = pitch_shift_curve(c, 7).curve;
  double e12 = 0.0, e7 = 0.0;
  bool voicing = true;
  for (std::size_t i = 0; i < c.frames.size(); ++i) {
    voicing = voicing && up.frames[i].has_value() == c.frames[i].has_value();
    if (!c.frames[i]) continue;
    e12 = std::max(e12, std::abs(*up.frames[i] / (2.0 * *c.frames[i]) - 1.0));
    e7 = std::max(e7, std::abs(*composed.frames[i] / *direct.frames[i] - 1.0));
  }
  return {voicing && e12 <= 1e-9 && e7 <= 1e-9,
          fmt("k=12 max rel err %.2e, shift(3)o(4) vs shift(7) %.2e", e12, e7)};
}

double envelope(double f) { return synthetic_envelope(f); }

// 6: retune 200 -> 300 Hz against the analytic envelope
Outcome envelope_preservation() {
  HnmFrame f;
  f.f0 = 200.0;
  f.mvf = 5000.0;
  for (int k = 1; k <= 25; ++k) f.harmonics.push_back({envelope(200.0 * k), wrap_phase(0.5 * k)});
  const auto g = retune_frame(f, 300.0);
  double err = 0.0, naive = 0.0;
  for (std::size_t k = 1; k + 1 < g.harmonics.size(); ++k) {
    const double want = envelope(300.0 * (k + 1));
    err = std::max(err, std::abs(g.harmonics[k].amplitude / want - 1.0));
    naive = std::max(naive, std::abs(f.harmonics[k].amplitude / want - 1.0));
  }
  return {err <= 0.02 && naive >= 0.20,
          fmt("max error %.2f%% (naive %.1f%%)", 100 * err, 100 * naive)};
}

HnmFrame random_frame(std::mt19937_64& rng, double t) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HnmFrame f;
  f.time_s = t;
  if (u(rng) < 0.15) {
    f.noise_ceps = {std::log(0.01), 0.2 * u(rng)};
    return f;
  }
  f.f0 = 150.0 + 100.0 * u(rng);
  const int k = 5 + static_cast<int>(10 * u(rng));
  f.mvf = f.f0 * k;
  for (int i = 0; i < k; ++i) f.harmonics.push_back({0.3 * u(rng), wrap_phase(kTwoPi * u(rng))});
  f.noise_ceps = {std::log(0.005), -0.1 * u(rng), 0.05 * u(rng)};
  return f;
}

// 7: control grid spacing and interpolated parameters
Outcome control_grid() {
  std::mt19937_64 rng(77);
  bool spacing = true;
  for (std::int64_t n : {1, 2, 99, 100, 101, 1000, 4567, 22050}) {
    const auto p = place_control_points(n);
    spacing = spacing && p.front() == 0;
    for (std::size_t i = 1; i < p.size(); ++i) {
      if (i + 1 < p.size()) spacing = spacing && p[i] - p[i - 1] == 100;
      else spacing = spacing && p[i] > p[i - 1] && p[i] - p[i - 1] <= 100 && p[i] == n - 1;
    }
  }

  SyllableUnit unit;
  unit.pinyin = "a";
  unit.length = 9000;
  unit.segmentation.a = {0, 2000};
  unit.segmentation.s = {2000, 7000};
  unit.segmentation.r = {7000, 9000};
  for (int j = 0; j * kHop + kFrameLen <= unit.length; ++j) {
    unit.frames.push_back(random_frame(rng, static_cast<double>(j * kHop + kHop) / kSampleRate));
  }
  SyllableSegmentation target;
  target.a = {0, 2600};
  target.s = {2600, 10000};
  target.r = {10000, 11500};
  const auto map = build_time_map(unit.segmentation, target);

  double worst = 0.0;
  for (auto p : place_control_points(target.length())) {
    // map by hand, then interpolate by hand
    const auto src_spans = unit.segmentation.spans();
    const auto dst_spans = target.spans();
    std::size_t piece = 0;
    for (std::size_t i = 0; i < dst_spans.size(); ++i) if (dst_spans[i].begin <= p) piece = i;
    const double src = src_spans[piece].begin + (p - dst_spans[piece].begin) *
                                                    static_cast<double>(src_spans[piece].length()) /
                                                    dst_spans[piece].length();
    const double t = src / kSampleRate;
    const auto& fr = unit.frames;
    std::size_t j = 0;
    while (j + 1 < fr.size() && fr[j + 1].time_s <= t) ++j;
    const HnmFrame& l = fr[j];
    const HnmFrame& r = j + 1 < fr.size() ? fr[j + 1] : fr[j];
    const double w = j + 1 < fr.size() ? std::clamp((t - l.time_s) / (r.time_s - l.time_s), 0.0, 1.0) : 0.0;
    const auto got = sample_hnm_at(unit, map, static_cast<double>(p));
    if (w == 0.0) {
      // on or outside a frame: that frame as is
      if (got.harmonics.size() != l.harmonics.size()) return {false, "frame copy lost harmonics"};
      worst = std::max(worst, std::abs(got.f0 - l.f0));
      worst = std::max(worst, std::abs(got.mvf - l.mvf));
      for (std::size_t h = 0; h < l.harmonics.size(); ++h)
        worst = std::max(worst, std::abs(got.harmonics[h].amplitude - l.harmonics[h].amplitude));
      continue;
    }
    if (l.voiced() && r.voiced()) {
      worst = std::max(worst, std::abs(got.f0 - (l.f0 + w * (r.f0 - l.f0))));
    } else if (l.voiced() || r.voiced()) {
      worst = std::max(worst, std::abs(got.f0 - (l.voiced() ? l.f0 : r.f0)));
    }
    worst = std::max(worst, std::abs(got.mvf - (l.mvf + w * (r.mvf - l.mvf))));
    const std::size_t k = std::max(l.harmonics.size(), r.harmonics.size());
    if (got.harmonics.size() != k) return {false, fmt("harmonic count %zu != %zu", got.harmonics.size(), k)};
    for (std::size_t h = 0; h < k; ++h) {
      const double al = h < l.harmonics.size() ? l.harmonics[h].amplitude : 0.0;
      const double ar = h < r.harmonics.size() ? r.harmonics[h].amplitude : 0.0;
      worst = std::max(worst, std::abs(got.harmonics[h].amplitude - (al + w * (ar - al))));
    }
    const std::size_t q = std::max(l.noise_ceps.size(), r.noise_ceps.size());
    for (std::size_t i = 0; i < q && i < got.noise_ceps.size(); ++i) {
      const double cl = i < l.noise_ceps.size() ? l.noise_ceps[i] : 0.0;
      const double cr = i < r.noise_ceps.size() ? r.noise_ceps[i] : 0.0;
      worst = std::max(worst, std::abs(got.noise_ceps[i] - (cl + w * (cr - cl))));
    }
  }

  // between control points: one harmonic, constant f0, amplitude ramps per span
  ControlPointGrid g;
  const std::int64_t n = 5000;
  g.positions = place_control_points(n);
  std::uniform_real_distribution<double> u(0.0, 0.5);
  for (std::size_t i = 0; i < g.positions.size(); ++i) {
    HnmFrame f;
    f.f0 = 210.0;
    f.mvf = 210.0;
    f.harmonics = {{u(rng), 0.25}};
    g.frames.push_back(f);
  }
  const auto y = synthesize_stream(g, n, 0);
  double between = 0.0;
  for (std::int64_t s = 0; s < n; ++s) {
    std::size_t i = 0;
    while (i + 1 < g.positions.size() && g.positions[i + 1] <= s) ++i;
    double a = g.frames[i].harmonics[0].amplitude;
    if (i + 1 < g.positions.size()) {
      const double w = static_cast<double>(s - g.positions[i]) / (g.positions[i + 1] - g.positions[i]);
      a += w * (g.frames[i + 1].harmonics[0].amplitude - a);
    }
    between = std::max(between, std::abs(y.samples[s] - a * std::cos(0.25 + kTwoPi * 210.0 * s / kSampleRate)));
  }
  return {spacing && worst <= 1e-9 && between <= 1e-9,
          fmt("spacing %s, grid-point error %.2e, between-point error %.2e", spacing ? "ok" : "BAD", worst, between)};
}

// 8: segment boundaries under random target plans
Outcome boundaries() {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::int64_t> len(300, 6000);
  int exact = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const bool with_cx = trial % 2 == 0, with_cn = trial % 3 == 0;
    auto build = [&] {
      SyllableSegmentation s;
      std::int64_t at = 0;
      auto next = [&] { Span sp{at, at + len(rng)}; at = sp.end; return sp; };
      if (with_cx) s.cx = next();
      s.a = next();
      s.s = next();
      s.r = next();
      if (with_cn) s.cn = next();
      return s;
    };
    const auto src = build();
    auto dst = build();
    SyllableUnit unit;
    unit.pinyin = with_cx ? "sa" : "a";
    unit.segmentation = src;
    unit.length = src.length();
    std::mt19937_64 frng(trial);
    for (int j = 0; j * kHop + kFrameLen <= unit.length; ++j) {
      auto f = random_frame(frng, static_cast<double>(j * kHop + kHop) / kSampleRate);
      unit.frames.push_back(f);
    }
    ExpressionParams e;
    e.lyric = unit.pinyin;
    e.note = MergedNote{{{60, 1.0, 2.0}}, 1.0, 2.0, false};
    const std::int64_t origin = 137 * trial;
    auto shift = [origin](Span s) { return Span{s.begin + origin, s.end + origin}; };
    e.segmentation = dst;
    if (dst.cx) e.segmentation.cx = shift(*dst.cx);
    e.segmentation.a = shift(dst.a);
    e.segmentation.s = shift(dst.s);
    e.segmentation.r = shift(dst.r);
    if (dst.cn) e.segmentation.cn = shift(*dst.cn);
    const auto r = render_syllable(unit, e, SynthMode::Expressive, trial);
    const auto map = build_time_map(src, r.segmentation);
    bool ok = r.segmentation.spans() == dst.spans() &&
              static_cast<std::int64_t>(r.samples.size()) == r.head_ext + dst.length() + r.tail_ext &&
              r.vowel_onset_sample == r.head_ext + dst.a.begin;
    const auto xs = src.spans();
    const auto ys = r.segmentation.spans();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ok = ok && map.map_to_source(static_cast<double>(ys[i].begin)) == static_cast<double>(xs[i].begin) &&
           map.map_to_source(static_cast<double>(ys[i].end)) == static_cast<double>(xs[i].end);
    }
    exact += ok;
  }
  return {exact == 20, fmt("%d/20 segmentations sample-exact", exact)};
}

// 9: portamento merging against a union-find closure
Outcome portamento() {
  std::mt19937_64 rng(9);
  const TempoMap tm(480, {{0, 500000}});
  int match = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<NoteEvent> notes;
    std::int64_t t = 0;
    const int count = 2 + static_cast<int>(rng() % 15);
    for (int i = 0; i < count; ++i) {
      t += static_cast<std::int64_t>(rng() % 400);
      notes.push_back({40 + static_cast<int>(rng() % 40), t, t + 1 + static_cast<std::int64_t>(rng() % 600)});
    }
    std::stable_sort(notes.begin(), notes.end(), [](const auto& a, const auto& b) {
      return std::tie(a.onset_tick, a.key) < std::tie(b.onset_tick, b.key);
    });
    std::vector<std::size_t> parent(notes.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
      return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    for (std::size_t i = 0; i < notes.size(); ++i) {
      for (std::size_t j = i + 1; j < notes.size(); ++j) {
        if (notes[j].onset_tick < notes[i].offset_tick && notes[i].onset_tick < notes[j].offset_tick) {
          parent[find(j)] = find(i);
        }
      }
    }
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < notes.size(); ++i) {
      if (i == 0 || find(i) != find(i - 1)) groups.emplace_back();
      groups.back().push_back(i);
    }
    const auto merged = merge_portamento(notes, tm);
    bool ok = merged.size() == groups.size();
    for (std::size_t gi = 0; ok && gi < groups.size(); ++gi) {
      ok = merged[gi].sub_notes.size() == groups[gi].size() &&
           merged[gi].portamento == (groups[gi].size() > 1);
      std::int64_t off = 0;
      for (std::size_t k = 0; ok && k < groups[gi].size(); ++k) {
        const auto& n = notes[groups[gi][k]];
        ok = merged[gi].sub_notes[k].key == n.key &&
             merged[gi].sub_notes[k].onset_s == tm.seconds_at(n.onset_tick) &&
             merged[gi].sub_notes[k].offset_s == tm.seconds_at(n.offset_tick);
        off = std::max(off, n.offset_tick);
      }
      ok = ok && merged[gi].t_on == tm.seconds_at(notes[groups[gi].front()].onset_tick) &&
           merged[gi].t_off == tm.seconds_at(off);
    }
    match += ok;
  }
  return {match == 50, fmt("%d/50 note sets match the closure oracle", match)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

struct DemoData {
  DemoPaths paths;
  Corpus corpus;
  std::vector<ScoredSyllable> score;
  ExpressionDocument expression;
};

const DemoData& demo_data() {
  static const DemoData d = [] {
    DemoData d;
    d.paths = write_demo_set(work_dir() / "lib", 0);
    for (const auto& rec : load_recording_manifest(d.paths.corpus_manifest)) {
      const auto labels = parse_labels(slurp(rec.labels));
      for (auto& u : analyze_recording(read_wav(rec.audio), labels, rec.key)) d.corpus.units[u.pinyin] = u;
    }
    const auto smf = read_smf(d.paths.score.string());
    const auto merged = merge_portamento(smf.notes, smf.tempo);
    const auto lyrics = parse_lyrics(slurp(d.paths.lyrics));
    d.score = attach_lyrics(merged, lyrics);
    d.expression = extract_expression(read_wav(d.paths.song), d.score,
                                      parse_labels(slurp(d.paths.song_labels)));
    return d;
  }();
  return d;
}

// 10: vowel onsets and rests in a five-syllable phrase
Outcome placement() {
  const auto& d = demo_data();
  PhraseOptions o;
  o.mode = SynthMode::Expressive;
  const auto res = synthesize_phrase(d.score, d.corpus, &d.expression, o);
  int exact = 0;
  const std::size_t n = res.exprs.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = res.exprs[i];
    const auto want = std::llround((e.note.t_on + e.onset_dev) * kSampleRate) + res.join.front_pad;
    exact += res.join.starts[i] + res.syllables[i].vowel_onset_sample == want;
  }
  // rests: score gaps between consecutive notes
  std::size_t rests = 0, loud = 0, rest_samples = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d.score[i + 1].note.t_on <= d.score[i].note.t_off) continue;
    ++rests;
    const auto from = res.join.starts[i] + static_cast<std::int64_t>(res.syllables[i].samples.size());
    const auto to = res.join.starts[i + 1];
    for (auto s = from; s < to; ++s) {
      ++rest_samples;
      loud += res.join.signal.samples[static_cast<std::size_t>(s)] != 0.0;
    }
  }
  const bool ok = n == 5 && exact == 5 && rests >= 1 && rest_samples > 1000 && loud == 0;
  return {ok, fmt("%d/%zu onsets exact; %zu rest(s), %zu interior samples, %zu non-zero", exact, n,
                  rests, rest_samples, loud)};
}

// 11: 4x energy target and unvoiced peak on an analysed unit
Outcome dynamics() {
  const auto& d = demo_data();
  const auto& unit = d.corpus.unit("sha");
  const ScoredSyllable s{"sha", MergedNote{{{57, 1.0, 1.0 + static_cast<double>(unit.length) / kSampleRate}},
                                          1.0, 1.0 + static_cast<double>(unit.length) / kSampleRate, false}};
  auto e = plain_expression(s, unit);
  const auto base = render_syllable(unit, e, SynthMode::Expressive, 3);
  const std::vector<double> core(base.samples.samples.begin() + base.head_ext,
                                 base.samples.samples.begin() + base.head_ext + base.core_length());
  e.energy = frame_energy_curve(core);
  for (auto& v : e.energy.values) v *= 4.0;
  e.unvoiced_peak = 0.0421;
  auto r = base;
  apply_dynamics(r, e);
  const std::vector<double> out(r.samples.samples.begin() + r.head_ext,
                                r.samples.samples.begin() + r.head_ext + r.core_length());
  const auto got = frame_energy_curve(out);
  const std::int64_t voiced_from = r.segmentation.a.begin;
  double worst = 0.0;
  std::size_t frames = 0;
  for (std::size_t i = 0; i < got.values.size(); ++i) {
    if (static_cast<std::int64_t>(i) * kHop < voiced_from) continue;
    ++frames;
    worst = std::max(worst, std::abs(got.values[i] / e.energy.values[i] - 1.0));
  }
  double peak = 0.0;
  for (std::int64_t i = 0; i < r.vowel_onset_sample; ++i) peak = std::max(peak, std::abs(r.samples.samples[i]));
  const double peak_err = std::abs(peak - e.unvoiced_peak);
  return {frames > 10 && worst <= 0.05 && peak_err <= 1e-6,
          fmt("%zu voiced frames, max energy ratio error %.2f%%, unvoiced peak error %.1e", frames,
              100 * worst, peak_err)};
}

// 12: the command-line tool end to end
Outcome end_to_end(const std::string& bin) {
  if (bin.empty()) return {false, "no CLI path given"};
  const auto dir = work_dir() / "cli";
  fs::create_directories(dir);
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  const auto t0 = Clock::now();
  auto call = [&](const std::string& args) {
    return std::system((q(bin) + " " + args + " >/dev/null 2>>" + q(dir / "stderr.txt")).c_str());
  };
  const auto demo = dir / "demo";
  const std::string score = " --score " + q(demo / "toy.mid") + " --lyrics " + q(demo / "toy.txt") +
                            " --corpus " + q(dir / "db");
  std::vector<int> codes;
  codes.push_back(call("make-synthetic --out " + q(demo)));
  codes.push_back(call("analyze-corpus --manifest " + q(demo / "recordings.json") + " --out " + q(dir / "db")));
  codes.push_back(call("extract-expression --audio " + q(demo / "song.wav") + " --score " + q(demo / "toy.mid") +
                       " --lyrics " + q(demo / "toy.txt") + " --labels " + q(demo / "song.lab") +
                       " --out " + q(dir / "expr.json")));
  codes.push_back(call("synthesize" + score + " --mode plain --seed 3 --out " + q(dir / "plain1.wav")));
  codes.push_back(call("synthesize" + score + " --mode plain --seed 3 --out " + q(dir / "plain2.wav")));
  codes.push_back(call("synthesize" + score + " --expression " + q(dir / "expr.json") + " --seed 3 --out " +
                       q(dir / "expr1.wav")));
  codes.push_back(call("synthesize" + score + " --expression " + q(dir / "expr.json") +
                       " --seed 3 --jobs 4 --out " + q(dir / "expr2.wav")));
  const double secs = since(t0);
  const bool exits = std::all_of(codes.begin(), codes.end(), [](int c) { return c == 0; });
  if (!exits) return {false, fmt("a command failed (see %s)", (dir / "stderr.txt").c_str())};

  const bool same_plain = slurp(dir / "plain1.wav") == slurp(dir / "plain2.wav");
  const bool same_expr = slurp(dir / "expr1.wav") == slurp(dir / "expr2.wav");
  const bool differ = slurp(dir / "plain1.wav") != slurp(dir / "expr1.wav");
  // the expression carries real curves: pitch leaves the score key somewhere
  const auto doc = load_expression(dir / "expr.json");
  double max_dev = 0.0;
  for (const auto& s : doc.syllables) {
    const double key = key_to_hz(s.note.sub_notes.front().key);
    for (const auto& f : s.pitch.frames) if (f) max_dev = std::max(max_dev, std::abs(1200 * std::log2(*f / key)));
  }
  const bool nontrivial = max_dev > 10.0;
  return {same_plain && same_expr && differ && nontrivial && secs < 30.0,
          fmt("exit 0 x%zu, plain repro %s, expressive repro %s, A/B differ %s, pitch deviation %.0f cents, %.2f s",
              codes.size(), same_plain ? "yes" : "no", same_expr ? "yes" : "no", differ ? "yes" : "no",
              max_dev, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string bin = argc > 1 ? argv[1] : "";
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"pitch oracle equivalence", pitch_oracle},
      {"pitch accuracy", pitch_accuracy},
      {"octave correction", octave_correction},
      {"HNM codec round trip", codec},
      {"semitone shift exactness", transpose},
      {"envelope preservation", envelope_preservation},
      {"control grid", control_grid},
      {"time mapping boundaries", boundaries},
      {"portamento merging", portamento},
      {"placement", placement},
      {"dynamics", dynamics},
      {"end-to-end determinism and A/B", [&] { return end_to_end(bin); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  if (failures == 0) fs::remove_all(work_dir(), ec);
  return failures;
}
