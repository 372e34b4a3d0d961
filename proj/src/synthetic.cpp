#include "hnmsing/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "fileio.hpp"
#include "hnmsing/error.hpp"
#include "hnmsing/score.hpp"

namespace hnmsing {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTopHz = 4000.0;

double bump(double f, double c, double w) { return std::exp(-((f - c) / w) * ((f - c) / w)); }

double ramp(double t, double len) {
  if (len <= 0.0 || t >= len) return 1.0;
  if (t <= 0.0) return 0.0;
  return 0.5 - 0.5 * std::cos(std::numbers::pi * t / len);
}

// Harmonic tone with vibrato, starting at phase zero of sample `begin`.
void add_voice(std::vector<double>& out, std::int64_t begin, std::int64_t len, double f0,
               double vibrato_cents, double vibrato_hz, double level, double attack_s,
               double release_s, double end_level, int sr) {
  double phase = 0.0;
  const auto k_max = static_cast<int>(std::min(kTopHz, 0.45 * sr) / f0);
  for (std::int64_t i = 0; i < len; ++i) {
    const auto n = begin + i;
    if (n < 0 || n >= static_cast<std::int64_t>(out.size())) continue;
    const double t = static_cast<double>(i) / sr;
    const double dur = static_cast<double>(len) / sr;
    const double cents = vibrato_cents * std::sin(kTwoPi * vibrato_hz * t);
    const double f = f0 * std::exp2(cents / 1200.0);
    const double env = ramp(t, attack_s) * ramp(dur - t, release_s) *
                       (level + (end_level - level) * t / dur);
    double v = 0.0;
    for (int k = 1; k <= k_max; ++k) {
      v += synthetic_envelope(k * f) * std::cos(k * phase + 0.3 * k);
    }
    out[static_cast<std::size_t>(n)] += env * v;
    phase += kTwoPi * f / sr;
  }
}

void add_noise(std::vector<double>& out, std::int64_t begin, std::int64_t len, double amp,
               bool highpass, bool decay, std::mt19937_64& rng, int sr) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double prev = 0.0;
  for (std::int64_t i = 0; i < len; ++i) {
    const auto n = begin + i;
    double v = d(rng);
    const double x = highpass ? 0.5 * (v - prev) : v;
    prev = v;
    if (n < 0 || n >= static_cast<std::int64_t>(out.size())) continue;
    const double t = static_cast<double>(i) / sr;
    const double env = decay ? std::exp(-t / 0.004) : ramp(t, 0.01) * ramp(static_cast<double>(len - i) / sr, 0.01);
    out[static_cast<std::size_t>(n)] += amp * env * x;
  }
}

}  // namespace

double synthetic_envelope(double f) {
  return 0.02 + 0.16 * bump(f, 650.0, 350.0) + 0.11 * bump(f, 1150.0, 450.0) +
         0.04 * bump(f, 2600.0, 600.0);
}

double synthetic_initial_s(const std::string& pinyin) {
  switch (classify_initial(pinyin)) {
    case InitialCategory::Stop: return 0.045;
    case InitialCategory::Fricative: return 0.100;
    case InitialCategory::Nasal: return 0.070;
    case InitialCategory::Glide: return 0.050;
    case InitialCategory::Null: return 0.0;
  }
  return 0.0;
}

SyntheticRecording make_recording(const std::vector<SungSyllable>& syllables, double total_s,
                                  std::uint64_t seed) {
  const int sr = kSampleRate;
  SyntheticRecording rec;
  rec.signal.sample_rate = sr;
  rec.signal.samples.assign(static_cast<std::size_t>(std::llround(total_s * sr)), 0.0);
  auto& x = rec.signal.samples;
  std::mt19937_64 rng(seed);

  for (std::size_t i = 0; i < syllables.size(); ++i) {
    const auto& s = syllables[i];
    const auto onset = std::llround(s.vowel_onset_s * sr);
    auto vowel_len = std::llround(s.vowel_s * sr);
    const auto init_len = std::llround(synthetic_initial_s(s.pinyin) * sr);
    if (i + 1 < syllables.size()) {
      // Rounding must not let a vowel run into the next syllable.
      const auto& n = syllables[i + 1];
      const auto next_begin =
          std::llround(n.vowel_onset_s * sr) - std::llround(synthetic_initial_s(n.pinyin) * sr);
      vowel_len = std::min(vowel_len, next_begin - onset);
    }
    const auto syl_begin = onset - init_len;
    if (syl_begin < 0 || onset + vowel_len > static_cast<std::int64_t>(x.size())) {
      throw Error(ErrorKind::SpanOutOfBounds, "synthetic syllable '" + s.pinyin + "' does not fit");
    }
    switch (classify_initial(s.pinyin)) {
      case InitialCategory::Stop: {
        const auto burst = std::llround(0.012 * sr);
        add_noise(x, onset - burst, burst, 0.35 * s.gain, false, true, rng, sr);
        break;
      }
      case InitialCategory::Fricative:
        add_noise(x, syl_begin, init_len, 0.12 * s.gain, true, false, rng, sr);
        break;
      case InitialCategory::Nasal:
        add_voice(x, syl_begin, init_len, s.f0, 0.0, s.vibrato_hz, 0.15 * s.gain, 0.01, 0.0,
                  0.15 * s.gain, sr);
        break;
      case InitialCategory::Glide:
        add_voice(x, syl_begin, init_len, s.f0, 0.0, s.vibrato_hz, 0.3 * s.gain, 0.01, 0.0,
                  0.3 * s.gain, sr);
        break;
      case InitialCategory::Null:
        break;
    }
    add_voice(x, onset, vowel_len, s.f0, s.vibrato_cents, s.vibrato_hz, s.gain, 0.05, 0.08,
              s.gain * s.end_gain, sr);
    rec.labels.entries.push_back({Span{syl_begin, onset + vowel_len}, SegmentKind::Syllable, s.pinyin});
    if (init_len > 0) {
      rec.labels.entries.push_back({Span{syl_begin, onset}, SegmentKind::Initial, ""});
    }
  }
  // Faint breath noise keeps the noise band populated.
  std::normal_distribution<double> breath(0.0, 2e-4);
  for (auto& v : x) v += breath(rng);
  return rec;
}

DemoPaths write_demo_set(const std::filesystem::path& dir, std::uint64_t seed) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string());
  DemoPaths p{dir / "recordings.json", dir / "toy.mid", dir / "toy.txt", dir / "song.wav",
              dir / "song.lab"};

  const std::vector<std::string> lyrics = {"ma", "ba", "sha", "yu", "a"};
  const std::vector<int> keys = {57, 60, 59, 57, 55};
  const std::vector<double> beats = {1.0, 1.0, 1.0, 0.5, 1.5};  // quarter notes
  const std::vector<bool> rest_after = {false, true, false, false, false};

  // Corpus: each syllable sung once at a flat 220 Hz.
  std::vector<SungSyllable> units;
  double t = 0.2;
  for (const auto& l : lyrics) {
    SungSyllable s;
    s.pinyin = l;
    s.vowel_onset_s = t + synthetic_initial_s(l);
    s.vowel_s = 0.45;
    s.f0 = 220.0;
    s.gain = 0.5;
    units.push_back(s);
    t = s.vowel_onset_s + s.vowel_s + 0.15;
  }
  const auto corpus = make_recording(units, t + 0.2, seed);
  write_wav(corpus.signal, dir / "corpus.wav");
  detail::write_text_file(dir / "corpus.lab", serialize_labels(corpus.labels));
  const nlohmann::json manifest = {
      {"format_version", 1},
      {"recordings", {{{"audio", "corpus.wav"}, {"labels", "corpus.lab"}, {"key", 57}}}}};
  detail::write_text_file(p.corpus_manifest, manifest.dump(1) + "\n");

  // Score at 100 bpm, 480 ticks per quarter.
  constexpr int tpq = 480;
  constexpr std::uint32_t tempo = 600000;
  std::vector<SmfNote> notes;
  std::int64_t tick = tpq;  // one beat of lead-in
  for (std::size_t i = 0; i < lyrics.size(); ++i) {
    const auto len = static_cast<std::int64_t>(beats[i] * tpq);
    notes.push_back({keys[i], tick, tick + len, 0, 100});
    tick += len + (rest_after[i] ? tpq : 0);
  }
  const auto smf = write_smf_format0(tpq, tempo, notes);
  detail::write_text_file(p.score, std::string(smf.begin(), smf.end()));
  std::string lyric_text;
  for (const auto& l : lyrics) lyric_text += l + " ";
  lyric_text.back() = '\n';
  detail::write_text_file(p.lyrics, lyric_text);

  // Sung rendition: onset deviations, vibrato and a dynamic arc.
  const std::vector<double> dev = {0.03, -0.02, 0.04, 0.0, -0.03};
  const std::vector<double> gain = {0.35, 0.5, 0.6, 0.45, 0.4};
  const double sec_per_tick = tempo * 1e-6 / tpq;
  std::vector<SungSyllable> sung;
  double end = 0.0;
  for (std::size_t i = 0; i < lyrics.size(); ++i) {
    SungSyllable s;
    s.pinyin = lyrics[i];
    const double on = static_cast<double>(notes[i].on_tick) * sec_per_tick;
    const double off = static_cast<double>(notes[i].off_tick) * sec_per_tick;
    s.vowel_onset_s = on + dev[i];
    const double next_on = i + 1 < lyrics.size()
                               ? static_cast<double>(notes[i + 1].on_tick) * sec_per_tick + dev[i + 1] -
                                     synthetic_initial_s(lyrics[i + 1])
                               : off + 0.1;
    s.vowel_s = std::min(off, next_on) - s.vowel_onset_s;
    s.f0 = key_to_hz(keys[i]);
    s.vibrato_cents = 25.0;
    s.gain = gain[i];
    s.end_gain = i % 2 == 0 ? 1.3 : 0.7;
    sung.push_back(s);
    end = std::max(end, s.vowel_onset_s + s.vowel_s);
  }
  const auto song = make_recording(sung, end + 0.3, seed + 1);
  write_wav(song.signal, p.song);
  detail::write_text_file(p.song_labels, serialize_labels(song.labels));
  return p;
}

}  // namespace hnmsing
