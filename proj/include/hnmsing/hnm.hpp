#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hnmsing/pitch.hpp"
#include "hnmsing/segmentation.hpp"
#include "hnmsing/signal_io.hpp"

namespace hnmsing {

inline constexpr int kCepstralOrder = 20;
inline constexpr double kNoiseGridHz = 100.0;
inline constexpr double kLogFloor = 1e-5;  // -100 dB
inline constexpr double kMvfCeilingRatio = 0.45;
inline constexpr int kControlSpacing = 100;

struct Harmonic {
  double amplitude = 0.0;
  double phase = 0.0;  // radians in (-pi, pi], referenced to the frame time

  friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

struct HnmFrame {
  double time_s = 0.0;
  double f0 = 0.0;   // 0 when unvoiced
  double mvf = 0.0;  // maximum voiced frequency, 0 when unvoiced
  std::vector<Harmonic> harmonics;
  std::vector<double> noise_ceps;  // empty: no noise part

  bool voiced() const noexcept { return f0 > 0.0; }
  friend bool operator==(const HnmFrame&, const HnmFrame&) = default;
};

// floor(mvf / f0), tolerant of the rounding in mvf = k * f0.
std::size_t harmonic_count(double mvf, double f0) noexcept;

double wrap_phase(double phase) noexcept;  // into (-pi, pi]

// Analysed corpus syllable: frames every `hop` samples from the unit start.
struct SyllableUnit {
  std::string pinyin;
  SyllableSegmentation segmentation;
  std::vector<HnmFrame> frames;
  int sample_rate = kSampleRate;
  int hop = kHop;
  std::int64_t length = 0;  // samples

  friend bool operator==(const SyllableUnit&, const SyllableUnit&) = default;
};

// Noise amplitudes sampled at start_hz, start_hz + step_hz, ...
struct NoiseGrid {
  double start_hz = kNoiseGridHz;
  double step_hz = kNoiseGridHz;
  std::vector<double> amps;
};

double estimate_mvf(std::span<const double> frame, double f0, int sample_rate = kSampleRate);

// Harmonic least-squares refinement of a coarse (lag-quantised) f0 within +-1.5%.
double refine_f0(std::span<const double> frame, double coarse_f0, int sample_rate = kSampleRate);

struct AnalysisOptions {
  int cepstral_order = kCepstralOrder;
};

// 20 ms frame; f0 == 0 analyses the frame as unvoiced. Phases refer to the
// frame centre sample (size - 1) / 2.
HnmFrame analyze_frame(std::span<const double> frame, double f0, int sample_rate = kSampleRate,
                       AnalysisOptions options = {});

std::vector<double> fit_noise_cepstrum(const NoiseGrid& grid, int sample_rate = kSampleRate,
                                       int order = kCepstralOrder);
double eval_noise_envelope(std::span<const double> ceps, double freq_hz,
                           int sample_rate = kSampleRate);

// HNM parameters on the target timeline: frames[i] holds at sample positions[i].
struct ControlPointGrid {
  int spacing = kControlSpacing;
  std::vector<std::int64_t> positions;
  std::vector<HnmFrame> frames;
};

Signal synthesize_stream(const ControlPointGrid& grid, std::size_t n_samples,
                         std::uint64_t noise_seed, int sample_rate = kSampleRate);

// Frames every `hop` samples across `span` (times relative to span.begin),
// f0 from the pitch curve (whose times are relative to sample 0 of signal).
std::vector<HnmFrame> analyze_span(const Signal& signal, Span span, const PitchCurve& pitch,
                                   int hop = kHop, AnalysisOptions options = {});

SyllableUnit analyze_syllable(const Signal& signal, const LabeledSyllable& syllable,
                              const SyllableSegmentation& segmentation, const PitchCurve& pitch,
                              AnalysisOptions options = {});

// Linear interpolation of HNM parameters at time t_s over frames sorted by
// time. f0, mvf, amplitudes and cepstra are interpolated; the harmonic list of
// the poorer frame is zero-padded; the phase comes from the nearer frame,
// advanced to t_s. Times outside the frame range clamp to the end frames.
HnmFrame interpolate_frames(std::span<const HnmFrame> frames, double t_s);

// Analysis of the whole signal followed by resynthesis on the control grid.
Signal resynthesize(const Signal& signal, const PitchCurve& pitch, std::uint64_t noise_seed = 0,
                    AnalysisOptions options = {});

}  // namespace hnmsing
