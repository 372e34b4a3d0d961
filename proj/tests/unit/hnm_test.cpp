#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

#include "fixtures.hpp"
#include "hnmsing/hnm.hpp"
#include "hnmsing/pitch.hpp"

using namespace hnmsing;
using fixtures::kind_of;

namespace {

ControlPointGrid grid_for(std::span<const HnmFrame> frames, std::int64_t n) {
  ControlPointGrid g;
  for (std::int64_t p = 0; p < n; p += kControlSpacing) g.positions.push_back(p);
  if (g.positions.back() != n - 1) g.positions.push_back(n - 1);
  for (auto p : g.positions) {
    g.frames.push_back(interpolate_frames(frames, static_cast<double>(p) / kSampleRate));
  }
  return g;
}

Signal round_trip(const Signal& s) {
  const auto pitch = extract_pitch_curve(s);
  const auto frames = analyze_span(s, Span{0, static_cast<std::int64_t>(s.size())}, pitch);
  return synthesize_stream(grid_for(frames, static_cast<std::int64_t>(s.size())), s.size(), 1);
}

std::vector<double> centre_frame(const Signal& s, std::size_t at = 4000) {
  return {s.samples.begin() + static_cast<std::ptrdiff_t>(at),
          s.samples.begin() + static_cast<std::ptrdiff_t>(at + kFrameLen)};
}

HnmFrame voiced(double t, double f0, std::vector<double> amps) {
  HnmFrame f;
  f.time_s = t;
  f.f0 = f0;
  f.mvf = f0 * static_cast<double>(amps.size());
  for (double a : amps) f.harmonics.push_back({a, 0.0});
  return f;
}

double bump(double f) { return 0.05 + 0.3 * std::exp(-0.5 * std::pow((f - 3000.0) / 900.0, 2)); }

}  // namespace

TEST(HnmCore, HarmonicCountAndWrap) {
  EXPECT_EQ(harmonic_count(2000.0, 200.0), 10u);
  EXPECT_EQ(harmonic_count(std::nextafter(600.0, 0.0), 200.0), 3u);
  EXPECT_EQ(harmonic_count(199.0, 200.0), 0u);
  EXPECT_DOUBLE_EQ(wrap_phase(std::numbers::pi), std::numbers::pi);
  EXPECT_NEAR(wrap_phase(-std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_phase(7.0), 7.0 - 2 * std::numbers::pi, 1e-12);
}

TEST(HnmCore, MvfTenCleanHarmonics) {
  const auto s = fixtures::harmonics(200.0, std::vector<double>(10, 0.08), 10000);
  EXPECT_GE(estimate_mvf(centre_frame(s), 200.0), 2000.0);
}

TEST(HnmCore, MvfHarmonicsBelowNoiseAbove) {
  auto s = fixtures::harmonics(200.0, std::vector<double>(10, 0.08), 10000);
  // white noise through a windowed-sinc high-pass at 2.1 kHz
  const auto w = fixtures::white_noise(10400, 0.6, 12);
  const int taps = 201;
  const double fc = 2100.0 / kSampleRate;
  std::vector<double> h(taps);
  for (int i = 0; i < taps; ++i) {
    const double m = i - taps / 2;
    const double lp = m == 0 ? 2 * fc : std::sin(fixtures::kTwoPi * fc * m) / (std::numbers::pi * m);
    h[i] = ((m == 0 ? 1.0 : 0.0) - lp) * (0.54 - 0.46 * std::cos(fixtures::kTwoPi * i / (taps - 1)));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    double acc = 0.0;
    for (int k = 0; k < taps; ++k) acc += h[k] * w.samples[i + k];
    s.samples[i] += acc;
  }
  // single noisy frames can run a few slots past the cutoff; take the median of six
  std::vector<double> mvfs;
  for (std::size_t at : {1000, 3000, 4000, 5000, 7000, 9000 - kFrameLen}) {
    mvfs.push_back(estimate_mvf(centre_frame(s, at), 200.0));
  }
  std::sort(mvfs.begin(), mvfs.end());
  const double mvf = 0.5 * (mvfs[2] + mvfs[3]);
  EXPECT_GE(mvf, 1800.0);
  EXPECT_LE(mvf, 2600.0);
}

TEST(HnmCore, MvfRejectsOutOfRangeF0) {
  const std::vector<double> f(kFrameLen, 0.1);
  EXPECT_EQ(kind_of([&] { estimate_mvf(f, 50.0); }), ErrorKind::F0OutOfRange);
}

TEST(HnmCore, AnalyzeSingleTone) {
  const auto s = fixtures::tones(std::vector<fixtures::Partial>{{200.0, 0.5}}, 10000);
  const auto f = analyze_frame(centre_frame(s), 200.0);
  ASSERT_FALSE(f.harmonics.empty());
  EXPECT_NEAR(f.harmonics[0].amplitude, 0.5, 0.02);
  for (std::size_t k = 1; k < f.harmonics.size(); ++k) EXPECT_LE(f.harmonics[k].amplitude, 0.01);
  EXPECT_EQ(f.harmonics.size(), harmonic_count(f.mvf, f.f0));
}

TEST(HnmCore, AnalyzeTwoTones) {
  const auto s = fixtures::tones(std::vector<fixtures::Partial>{{200.0, 0.4}, {400.0, 0.2, 1.0}}, 10000);
  const auto f = analyze_frame(centre_frame(s), 200.0);
  ASSERT_GE(f.harmonics.size(), 2u);
  EXPECT_NEAR(f.harmonics[0].amplitude, 0.4, 0.02);
  EXPECT_NEAR(f.harmonics[1].amplitude, 0.2, 0.02);
}

TEST(HnmCore, AnalyzePhaseReferencedToFrameCentre) {
  const double ph = 0.7;
  const auto s = fixtures::tones(std::vector<fixtures::Partial>{{250.0, 0.5, ph}}, 10000);
  const std::size_t at = 4000;
  const auto f = analyze_frame(centre_frame(s, at), 250.0);
  const double want = wrap_phase(fixtures::kTwoPi * 250.0 * (at + 220.0) / kSampleRate + ph);
  EXPECT_NEAR(std::remainder(f.harmonics[0].phase - want, fixtures::kTwoPi), 0.0, 0.02);
}

TEST(HnmCore, AnalyzeSilenceUnvoiced) {
  const auto f = analyze_frame(std::vector<double>(kFrameLen, 0.0), 0.0);
  EXPECT_EQ(f.f0, 0.0);
  EXPECT_EQ(f.mvf, 0.0);
  EXPECT_TRUE(f.harmonics.empty());
  ASSERT_EQ(f.noise_ceps.size(), static_cast<std::size_t>(kCepstralOrder));
  // silence sits on the log floor
  for (double hz = 0; hz <= 11025; hz += 50) {
    EXPECT_LE(eval_noise_envelope(f.noise_ceps, hz), kLogFloor * 1.001);
  }
  EXPECT_EQ(kind_of([] { analyze_frame(std::vector<double>(300, 0.0), 0.0); }),
            ErrorKind::BadFrameLength);
}

TEST(HnmCore, AnalysisHarmonicCountInvariant) {
  const auto s = fixtures::harmonics(160.0, {0.3, 0.2, 0.15, 0.1, 0.05, 0.05}, 8000);
  const auto pitch = extract_pitch_curve(s);
  for (const auto& f : analyze_span(s, Span{0, 8000}, pitch)) {
    if (f.voiced()) {
      EXPECT_EQ(f.harmonics.size(), harmonic_count(f.mvf, f.f0));
      EXPECT_LE(f.mvf, 0.45 * kSampleRate + 1e-9);
      for (const auto& h : f.harmonics) {
        EXPECT_GE(h.amplitude, 0.0);
        EXPECT_GT(h.phase, -std::numbers::pi);
        EXPECT_LE(h.phase, std::numbers::pi);
      }
    } else {
      EXPECT_EQ(f.mvf, 0.0);
      EXPECT_TRUE(f.harmonics.empty());
    }
  }
}

TEST(HnmCore, CepstrumFlat) {
  NoiseGrid g;
  g.amps.assign(110, 0.1);
  const auto c = fit_noise_cepstrum(g);
  ASSERT_EQ(c.size(), 20u);
  EXPECT_NEAR(c[0], std::log(0.1), 1e-6);
  for (std::size_t q = 1; q < c.size(); ++q) EXPECT_NEAR(c[q], 0.0, 1e-6);
  for (double hz : {0.0, 1234.0, 11025.0}) EXPECT_NEAR(eval_noise_envelope(c, hz), 0.1, 1e-6);
}

TEST(HnmCore, CepstrumBumpWithinOneDb) {
  NoiseGrid g;
  g.start_hz = 1500.0;
  for (double f = g.start_hz; f <= 11025.0; f += g.step_hz) g.amps.push_back(bump(f));
  const auto c = fit_noise_cepstrum(g);
  for (std::size_t i = 0; i < g.amps.size(); ++i) {
    const double f = g.start_hz + g.step_hz * static_cast<double>(i);
    EXPECT_NEAR(20.0 * std::log10(eval_noise_envelope(c, f) / g.amps[i]), 0.0, 1.0) << f;
  }
}

TEST(HnmCore, CepstrumZeroAmplitudesFloored) {
  NoiseGrid g;
  g.amps.assign(50, 0.0);
  g.amps[10] = 0.2;
  for (double v : fit_noise_cepstrum(g)) EXPECT_TRUE(std::isfinite(v));
  g.amps.clear();
  EXPECT_EQ(kind_of([&] { fit_noise_cepstrum(g); }), ErrorKind::EmptyGrid);
}

TEST(HnmCore, EvalEnvelopeContract) {
  const std::vector<double> c{std::log(0.3)};
  EXPECT_NEAR(eval_noise_envelope(c, 0.0), 0.3, 1e-12);
  EXPECT_NEAR(eval_noise_envelope(c, 8000.0), 0.3, 1e-12);
  EXPECT_EQ(kind_of([&] { eval_noise_envelope(c, 11026.0); }), ErrorKind::FreqOutOfRange);
  EXPECT_EQ(kind_of([&] { eval_noise_envelope(c, -1.0); }), ErrorKind::FreqOutOfRange);
}

TEST(HnmCore, SynthesizeSingleHarmonicRms) {
  const std::int64_t n = 22050;
  std::vector<HnmFrame> frames{voiced(0.0, 200.0, {0.5}), voiced(1.0, 200.0, {0.5})};
  const auto y = synthesize_stream(grid_for(frames, n), n, 3);
  EXPECT_NEAR(fixtures::rms(y.samples), 0.5 / std::sqrt(2.0), 0.01 * 0.5 / std::sqrt(2.0));
}

TEST(HnmCore, SynthesizeSilentFrames) {
  std::vector<HnmFrame> frames(2);
  frames[1].time_s = 1.0;
  const auto y = synthesize_stream(grid_for(frames, 2000), 2000, 3);
  for (double v : y.samples) EXPECT_EQ(v, 0.0);
}

TEST(HnmCore, SynthesizeContract) {
  EXPECT_EQ(kind_of([] { synthesize_stream(ControlPointGrid{}, 10, 0); }), ErrorKind::EmptyFrames);
  ControlPointGrid g;
  g.positions = {0, 100, 250};
  g.frames.assign(3, HnmFrame{});
  EXPECT_EQ(kind_of([&] { synthesize_stream(g, 300, 0); }), ErrorKind::NonuniformSpacing);
}

TEST(HnmCore, CodecRoundTripThreeHarmonics) {
  const auto s = fixtures::harmonics(220.0, {0.4, 0.2, 0.1}, kSampleRate);
  const auto t0 = std::chrono::steady_clock::now();
  const auto y = round_trip(s);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_GE(fixtures::snr_db(s.samples, y.samples, kFrameLen), 25.0);
  EXPECT_LT(secs, 2.0);
}

TEST(HnmCore, CodecRoundTripAcrossPitches) {
  // the 20 ms window resolves harmonics from roughly 150 Hz upward
  for (double f0 : {180.0, 260.0, 330.0, 440.0}) {
    const auto s = fixtures::harmonics(f0, {0.4, 0.2, 0.1}, kSampleRate / 2);
    EXPECT_GE(fixtures::snr_db(s.samples, round_trip(s).samples, kFrameLen), 25.0) << f0;
  }
}

TEST(HnmCore, ResynthesizeMatchesInput) {
  const auto s = fixtures::harmonics(240.0, {0.3, 0.25, 0.1, 0.05}, 11025);
  const auto y = resynthesize(s, extract_pitch_curve(s), 5);
  ASSERT_EQ(y.size(), s.size());
  EXPECT_GE(fixtures::snr_db(s.samples, y.samples, kFrameLen), 25.0);
}

TEST(HnmCore, AdditivityOfHarmonicAndNoiseParts) {
  auto s = fixtures::harmonics(200.0, {0.3, 0.2, 0.1}, 11025);
  const auto w = fixtures::white_noise(11025, 0.05, 2);
  for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] += w.samples[i];
  const auto frames = analyze_span(s, Span{0, 11025}, extract_pitch_curve(s));
  const auto full = grid_for(frames, 11025);
  auto harm = full;
  auto noise = full;
  for (auto& f : harm.frames) f.noise_ceps.clear();
  for (auto& f : noise.frames) f.harmonics.clear();
  const auto y = synthesize_stream(full, 11025, 77);
  const auto yh = synthesize_stream(harm, 11025, 77);
  const auto yn = synthesize_stream(noise, 11025, 77);
  for (std::size_t i = 0; i < y.size(); ++i) ASSERT_EQ(y.samples[i], yh.samples[i] + yn.samples[i]) << i;
}

TEST(HnmCore, DeterministicUnderSeed) {
  const auto s = fixtures::white_noise(6000, 0.2, 9);
  const auto frames = analyze_span(s, Span{0, 6000}, extract_pitch_curve(s));
  const auto g = grid_for(frames, 6000);
  EXPECT_EQ(synthesize_stream(g, 6000, 4).samples, synthesize_stream(g, 6000, 4).samples);
  EXPECT_NE(synthesize_stream(g, 6000, 4).samples, synthesize_stream(g, 6000, 5).samples);
}

TEST(HnmCore, PhaseContinuityOnSteadyTone) {
  const auto s = fixtures::harmonics(230.0, {0.3, 0.2, 0.1, 0.05}, kSampleRate);
  const auto frames = analyze_span(s, Span{0, kSampleRate}, extract_pitch_curve(s));
  auto g = grid_for(frames, kSampleRate);
  for (auto& f : g.frames) f.noise_ceps.clear();
  const auto y = synthesize_stream(g, kSampleRate, 0);
  std::vector<double> e;
  for (std::size_t i = 441; i + 441 + 64 < y.size(); i += 32) {
    double acc = 0.0;
    for (std::size_t t = i; t < i + 64; ++t) acc += std::pow(y.samples[t + 1] - y.samples[t], 2);
    e.push_back(acc);
  }
  auto sorted = e;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double med = sorted[sorted.size() / 2];
  for (double v : e) EXPECT_LE(v, 3.0 * med);
}

TEST(HnmCore, InterpolateExactAndMidpoint) {
  const std::vector<HnmFrame> f{voiced(0.0, 200.0, {0.2, 0.1}), voiced(0.01, 200.0, {0.4, 0.3})};
  EXPECT_EQ(interpolate_frames(f, 0.0), f[0]);
  const auto m = interpolate_frames(f, 0.005);
  EXPECT_NEAR(m.harmonics[0].amplitude, 0.3, 1e-12);
  EXPECT_NEAR(m.harmonics[1].amplitude, 0.2, 1e-12);
}

TEST(HnmCore, InterpolateZeroPadsPoorerFrame) {
  std::vector<double> ten(10, 0.1), twelve(12, 0.1);
  twelve[10] = 0.6;
  twelve[11] = 0.8;
  const std::vector<HnmFrame> f{voiced(0.0, 100.0, ten), voiced(0.01, 100.0, twelve)};
  const auto m = interpolate_frames(f, 0.005);
  ASSERT_EQ(m.harmonics.size(), 12u);
  EXPECT_NEAR(m.harmonics[10].amplitude, 0.3, 1e-12);
  EXPECT_NEAR(m.harmonics[11].amplitude, 0.4, 1e-12);
  EXPECT_NEAR(m.mvf, 1100.0, 1e-9);
  EXPECT_EQ(kind_of([] { interpolate_frames({}, 0.0); }), ErrorKind::EmptyFrames);
}

TEST(HnmCore, AnalyzeSyllableExamples) {
  const auto tone = fixtures::harmonics(220.0, {0.3, 0.2, 0.1}, 9000);
  LabeledSyllable syl;
  syl.span = {1000, 8000};
  syl.text = "a";
  SyllableSegmentation seg;
  seg.a = {0, 1000};
  seg.s = {1000, 6000};
  seg.r = {6000, 7000};
  const auto unit = analyze_syllable(tone, syl, seg, extract_pitch_curve(tone));
  EXPECT_EQ(unit.length, 7000);
  EXPECT_EQ(unit.segmentation, seg);
  ASSERT_FALSE(unit.frames.empty());
  for (const auto& f : unit.frames) EXPECT_TRUE(f.voiced()) << f.time_s;

  Signal quiet;
  quiet.samples.assign(9000, 0.0);
  const auto q = analyze_syllable(quiet, syl, seg, extract_pitch_curve(quiet));
  for (const auto& f : q.frames) EXPECT_FALSE(f.voiced());

  syl.span = {1000, 9500};
  EXPECT_EQ(kind_of([&] { analyze_syllable(tone, syl, seg, extract_pitch_curve(tone)); }),
            ErrorKind::SpanOutOfBounds);
}
