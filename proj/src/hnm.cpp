#include "hnmsing/hnm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hnmsing/error.hpp"
#include "spectrum.hpp"

namespace hnmsing {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kMvfFft = 4096;
constexpr double kHarmonicPeakRatio = 1.9952623149688795;  // +6 dB
constexpr int kMaxConsecutiveMisses = 2;
constexpr int kRefineHarmonics = 8;
constexpr double kRefineSpan = 0.015;
constexpr double kCepstralRidge = 1e-4;

void check_frame_length(std::span<const double> frame, int sample_rate) {
  const auto expected = static_cast<std::size_t>(std::lround(0.02 * sample_rate));
  if (frame.size() != expected) {
    throw Error(ErrorKind::BadFrameLength, "HNM frame must hold " + std::to_string(expected) +
                                               " samples, got " + std::to_string(frame.size()));
  }
}

void check_f0(double f0) {
  if (!(f0 >= kMinF0 && f0 <= kMaxF0)) {
    throw Error(ErrorKind::F0OutOfRange, "f0 " + std::to_string(f0) + " Hz outside [60, 500]");
  }
}

double window_sum(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

double nyquist(int sample_rate) { return 0.5 * sample_rate; }

// Weighted harmonic least-squares residual for a candidate f0.
double harmonic_residual(std::span<const double> frame, std::span<const double> window,
                         double f0, int k_max, int sample_rate) {
  const auto n = static_cast<Eigen::Index>(frame.size());
  const double center = 0.5 * static_cast<double>(frame.size() - 1);
  Eigen::MatrixXd a(n, 2 * k_max);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = std::sqrt(window[static_cast<std::size_t>(i)]);
    b(i) = sw * frame[static_cast<std::size_t>(i)];
    const double base = kTwoPi * f0 * (static_cast<double>(i) - center) / sample_rate;
    for (int k = 0; k < k_max; ++k) {
      a(i, 2 * k) = sw * std::cos((k + 1) * base);
      a(i, 2 * k + 1) = sw * std::sin((k + 1) * base);
    }
  }
  const Eigen::VectorXd coef = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  return (b - a * coef).squaredNorm();
}

std::vector<std::complex<double>> noise_coefficients(const HnmFrame& frame, std::size_t bins,
                                                     std::span<const double> phases,
                                                     int sample_rate) {
  std::vector<std::complex<double>> c(bins + 1, {0.0, 0.0});
  if (frame.noise_ceps.empty()) return c;
  for (std::size_t j = 1; j <= bins; ++j) {
    const double f = kNoiseGridHz * static_cast<double>(j);
    if (f <= frame.mvf) continue;
    c[j] = std::polar(eval_noise_envelope(frame.noise_ceps, f, sample_rate), phases[j]);
  }
  return c;
}

// Re(sum_j c_j w^j) by Horner's rule.
double eval_noise_series(const std::vector<std::complex<double>>& c, std::complex<double> w) {
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t j = c.size(); j-- > 1;) acc = acc * w + c[j];
  return (acc * w).real();
}

double lerp(double a, double b, double u) { return a + u * (b - a); }

}  // namespace

std::size_t harmonic_count(double mvf, double f0) noexcept {
  if (!(f0 > 0.0) || !(mvf > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(mvf / f0 + 1e-9));
}

double wrap_phase(double phase) noexcept {
  double p = std::remainder(phase, kTwoPi);  // [-pi, pi]
  if (p <= -std::numbers::pi) p += kTwoPi;
  return p;
}

double estimate_mvf(std::span<const double> frame, double f0, int sample_rate) {
  check_f0(f0);
  const auto window = detail::hamming(frame.size());
  const std::size_t fft = std::max(kMvfFft, std::bit_ceil(frame.size()));
  const auto mag = detail::magnitude_spectrum(frame, window, fft);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft);
  const double ceiling = kMvfCeilingRatio * sample_rate;

  const auto bin_of = [&](double hz) {
    return static_cast<std::ptrdiff_t>(std::lround(hz / bin_hz));
  };
  const auto last_bin = static_cast<std::ptrdiff_t>(mag.size()) - 1;

  double mvf = 0.0;
  int misses = 0;
  for (int k = 1; k * f0 <= ceiling; ++k) {
    const double center = k * f0;
    double peak = 0.0;
    for (auto b = std::max<std::ptrdiff_t>(0, bin_of(center - f0 / 4));
         b <= std::min(last_bin, bin_of(center + f0 / 4)); ++b) {
      peak = std::max(peak, mag[static_cast<std::size_t>(b)]);
    }
    // Surrounding level: the inter-harmonic gaps on either side of the slot.
    std::vector<double> around;
    for (double side : {-1.0, 1.0}) {
      const double lo = center + side * f0 / 4;
      const double hi = center + side * 3 * f0 / 4;
      for (auto b = std::max<std::ptrdiff_t>(0, bin_of(std::min(lo, hi)));
           b <= std::min(last_bin, bin_of(std::max(lo, hi))); ++b) {
        around.push_back(mag[static_cast<std::size_t>(b)]);
      }
    }
    const double level = detail::median(std::move(around));
    if (peak > 0.0 && peak >= kHarmonicPeakRatio * level) {
      mvf = center;
      misses = 0;
    } else if (++misses > kMaxConsecutiveMisses) {
      break;
    }
  }
  return std::clamp(mvf, f0, ceiling);
}

double refine_f0(std::span<const double> frame, double coarse_f0, int sample_rate) {
  check_f0(coarse_f0);
  const auto window = detail::hamming(frame.size());
  const int k_max = std::clamp(
      static_cast<int>(std::floor(kMvfCeilingRatio * sample_rate / coarse_f0)), 1,
      kRefineHarmonics);
  double lo = coarse_f0 * (1.0 - kRefineSpan);
  double hi = coarse_f0 * (1.0 + kRefineSpan);
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = harmonic_residual(frame, window, x1, k_max, sample_rate);
  double f2 = harmonic_residual(frame, window, x2, k_max, sample_rate);
  for (int it = 0; it < 48 && hi - lo > 1e-9 * coarse_f0; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = harmonic_residual(frame, window, x1, k_max, sample_rate);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = harmonic_residual(frame, window, x2, k_max, sample_rate);
    }
  }
  return std::clamp(0.5 * (lo + hi), kMinF0, kMaxF0);
}

HnmFrame analyze_frame(std::span<const double> frame, double f0, int sample_rate,
                       AnalysisOptions options) {
  check_frame_length(frame, sample_rate);
  const auto window = detail::hamming(frame.size());
  const double gain = 2.0 / window_sum(window);
  const double center = 0.5 * static_cast<double>(frame.size() - 1);
  const double nyq = nyquist(sample_rate);

  HnmFrame out;
  std::vector<double> residual(frame.begin(), frame.end());
  if (f0 > 0.0) {
    check_f0(f0);
    out.f0 = f0;
    out.mvf = estimate_mvf(frame, f0, sample_rate);
    const std::size_t k_count = harmonic_count(out.mvf, f0);
    out.harmonics.reserve(k_count);
    for (std::size_t k = 1; k <= k_count; ++k) {
      const auto x = detail::dtft_at(frame, window, k * f0, sample_rate, center);
      Harmonic h{gain * std::abs(x), wrap_phase(std::arg(x))};
      const double w = kTwoPi * k * f0 / sample_rate;
      for (std::size_t n = 0; n < residual.size(); ++n) {
        residual[n] -= h.amplitude * std::cos(w * (static_cast<double>(n) - center) + h.phase);
      }
      out.harmonics.push_back(h);
    }
  }

  NoiseGrid grid;
  for (double f = kNoiseGridHz; f <= nyq; f += kNoiseGridHz) {
    if (f <= out.mvf) {
      grid.start_hz = f + kNoiseGridHz;
      continue;
    }
    grid.amps.push_back(gain * std::abs(detail::dtft_at(residual, window, f, sample_rate, center)));
  }
  out.noise_ceps = fit_noise_cepstrum(grid, sample_rate, options.cepstral_order);
  return out;
}

std::vector<double> fit_noise_cepstrum(const NoiseGrid& grid, int sample_rate, int order) {
  if (grid.amps.empty()) throw Error(ErrorKind::EmptyGrid, "no noise grid points to fit");
  if (order < 1) throw Error(ErrorKind::EmptyGrid, "cepstral order must be positive");
  const double nyq = nyquist(sample_rate);
  const auto m = static_cast<Eigen::Index>(grid.amps.size());
  Eigen::MatrixXd basis(m, order);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double f = grid.start_hz + grid.step_hz * static_cast<double>(i);
    y(i) = std::log(std::max(grid.amps[static_cast<std::size_t>(i)], kLogFloor));
    basis(i, 0) = 1.0;
    for (int q = 1; q < order; ++q) basis(i, q) = 2.0 * std::cos(std::numbers::pi * q * f / nyq);
  }
  // Ridge on the higher quefrencies keeps sparse grids well posed.
  Eigen::MatrixXd normal = basis.transpose() * basis;
  for (int q = 1; q < order; ++q) {
    normal(q, q) += kCepstralRidge * static_cast<double>(m) * q * q;
  }
  const Eigen::VectorXd c = normal.ldlt().solve(basis.transpose() * y);
  return std::vector<double>(c.data(), c.data() + c.size());
}

double eval_noise_envelope(std::span<const double> ceps, double freq_hz, int sample_rate) {
  const double nyq = nyquist(sample_rate);
  if (!(freq_hz >= 0.0 && freq_hz <= nyq)) {
    throw Error(ErrorKind::FreqOutOfRange, std::to_string(freq_hz) + " Hz outside [0, Nyquist]");
  }
  if (ceps.empty()) return 0.0;
  double log_amp = ceps[0];
  for (std::size_t q = 1; q < ceps.size(); ++q) {
    log_amp += 2.0 * ceps[q] * std::cos(std::numbers::pi * static_cast<double>(q) * freq_hz / nyq);
  }
  return std::exp(log_amp);
}

Signal synthesize_stream(const ControlPointGrid& grid, std::size_t n_samples,
                         std::uint64_t noise_seed, int sample_rate) {
  if (grid.frames.empty() || grid.positions.size() != grid.frames.size()) {
    throw Error(ErrorKind::EmptyFrames, "control grid has no frames");
  }
  if (grid.positions.front() != 0) {
    throw Error(ErrorKind::NonuniformSpacing, "first control point must sit at sample 0");
  }
  for (std::size_t i = 1; i < grid.positions.size(); ++i) {
    const auto gap = grid.positions[i] - grid.positions[i - 1];
    const bool last = i + 1 == grid.positions.size();
    if (gap != grid.spacing && !(last && gap > 0 && gap < grid.spacing)) {
      throw Error(ErrorKind::NonuniformSpacing,
                  "control gap " + std::to_string(gap) + " at index " + std::to_string(i));
    }
  }

  const double nyq = nyquist(sample_rate);
  const auto bins = static_cast<std::size_t>(std::floor(nyq / kNoiseGridHz));

  // Random phases are drawn for every grid bin of every control point so the
  // noise realisation does not depend on mvf or on the harmonic content.
  std::mt19937_64 rng(noise_seed);
  std::vector<std::vector<std::complex<double>>> noise(grid.frames.size());
  std::vector<double> phases(bins + 1, 0.0);
  for (std::size_t i = 0; i < grid.frames.size(); ++i) {
    for (std::size_t j = 1; j <= bins; ++j) {
      phases[j] = kTwoPi * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    noise[i] = noise_coefficients(grid.frames[i], bins, phases, sample_rate);
  }

  Signal out;
  out.sample_rate = sample_rate;
  out.samples.assign(n_samples, 0.0);

  std::vector<double> phase;
  std::vector<bool> active;
  std::vector<double> amp_l, amp_r;
  const auto n_total = static_cast<std::int64_t>(n_samples);
  for (std::size_t i = 0; i < grid.frames.size(); ++i) {
    const bool last = i + 1 == grid.frames.size();
    const std::int64_t p0 = grid.positions[i];
    const std::int64_t p1 = last ? n_total : std::min(n_total, grid.positions[i + 1]);
    if (p0 >= n_total) break;
    const HnmFrame& fl = grid.frames[i];
    const HnmFrame& fr = last ? fl : grid.frames[i + 1];
    const double span = last ? 1.0 : static_cast<double>(grid.positions[i + 1] - p0);

    const std::size_t kl = fl.voiced() ? fl.harmonics.size() : 0;
    const std::size_t kr = fr.voiced() ? fr.harmonics.size() : 0;
    const std::size_t k_span = std::max(kl, kr);
    if (phase.size() < k_span) {
      phase.resize(k_span, 0.0);
      active.resize(k_span, false);
    }
    amp_l.assign(k_span, 0.0);
    amp_r.assign(k_span, 0.0);
    for (std::size_t k = 0; k < kl; ++k) amp_l[k] = fl.harmonics[k].amplitude;
    for (std::size_t k = 0; k < kr; ++k) amp_r[k] = fr.harmonics[k].amplitude;
    const double f0_l = fl.voiced() ? fl.f0 : fr.f0;
    const double f0_r = fr.voiced() ? fr.f0 : fl.f0;

    for (std::size_t k = 0; k < active.size(); ++k) {
      if (k >= k_span) {
        active[k] = false;
        continue;
      }
      if (active[k]) continue;
      active[k] = true;
      if (k < kl) {
        phase[k] = fl.harmonics[k].phase;
      } else {
        // Starts at zero amplitude; align so it reaches the right frame's phase.
        phase[k] = fr.harmonics[k].phase - kTwoPi * (k + 1) * f0_r * span / sample_rate;
      }
    }

    const auto& nl = noise[i];
    const auto& nr = last ? noise[i] : noise[i + 1];
    for (std::int64_t n = p0; n < p1; ++n) {
      const double u = last ? 0.0 : static_cast<double>(n - p0) / span;
      double h = 0.0;
      if (k_span > 0) {
        const double f0 = lerp(f0_l, f0_r, u);
        const double step = kTwoPi * f0 / sample_rate;
        for (std::size_t k = 0; k < k_span; ++k) {
          if ((k + 1) * f0 < nyq) h += lerp(amp_l[k], amp_r[k], u) * std::cos(phase[k]);
          phase[k] += (k + 1) * step;
        }
      }
      const std::complex<double> w =
          std::polar(1.0, kTwoPi * kNoiseGridHz * static_cast<double>(n) / sample_rate);
      const double noise_l = eval_noise_series(nl, w);
      const double noise_r = last ? 0.0 : eval_noise_series(nr, w);
      const double nz = last ? noise_l : (1.0 - u) * noise_l + u * noise_r;
      out.samples[static_cast<std::size_t>(n)] = h + nz;
    }
    for (auto& p : phase) p = wrap_phase(p);
  }
  return out;
}

std::vector<HnmFrame> analyze_span(const Signal& signal, Span span, const PitchCurve& pitch,
                                   int hop, AnalysisOptions options) {
  const auto n_signal = static_cast<std::int64_t>(signal.size());
  const auto frame_len = static_cast<std::int64_t>(std::lround(0.02 * signal.sample_rate));
  if (span.begin < 0 || span.end > n_signal || span.length() <= 0 || n_signal < frame_len) {
    throw Error(ErrorKind::SpanOutOfBounds,
                "span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                    ") outside signal of " + std::to_string(n_signal) + " samples");
  }
  const std::int64_t half = (frame_len - 1) / 2;
  const std::int64_t count = (span.length() - 1 + hop - 1) / hop + 1;
  std::vector<HnmFrame> frames;
  frames.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const std::int64_t want = span.begin + i * hop;
    // Frames near the signal edges are analysed at the nearest full window.
    const std::int64_t at = std::clamp(want, half, n_signal - frame_len + half);
    const std::span<const double> frame(signal.samples.data() + (at - half),
                                        static_cast<std::size_t>(frame_len));
    const auto coarse = pitch.value_near(static_cast<double>(at) / signal.sample_rate);
    double f0 = 0.0;
    if (coarse) f0 = refine_f0(frame, std::clamp(*coarse, kMinF0, kMaxF0), signal.sample_rate);
    HnmFrame f = analyze_frame(frame, f0, signal.sample_rate, options);
    if (at != want && f.voiced()) {
      const double dt = static_cast<double>(want - at) / signal.sample_rate;
      for (std::size_t k = 0; k < f.harmonics.size(); ++k) {
        f.harmonics[k].phase = wrap_phase(f.harmonics[k].phase + kTwoPi * (k + 1) * f.f0 * dt);
      }
    }
    f.time_s = static_cast<double>(i * hop) / signal.sample_rate;
    frames.push_back(std::move(f));
  }
  return frames;
}

SyllableUnit analyze_syllable(const Signal& signal, const LabeledSyllable& syllable,
                              const SyllableSegmentation& segmentation, const PitchCurve& pitch,
                              AnalysisOptions options) {
  SyllableUnit unit;
  unit.pinyin = syllable.text;
  unit.segmentation = segmentation;
  unit.sample_rate = signal.sample_rate;
  unit.hop = kHop;
  unit.length = syllable.span.length();
  unit.frames = analyze_span(signal, syllable.span, pitch, kHop, options);
  return unit;
}

HnmFrame interpolate_frames(std::span<const HnmFrame> frames, double t_s) {
  if (frames.empty()) throw Error(ErrorKind::EmptyFrames, "no frames to interpolate");

  const auto advanced = [](const HnmFrame& f, double t) {
    HnmFrame out = f;
    out.time_s = t;
    if (f.voiced() && t != f.time_s) {
      for (std::size_t k = 0; k < out.harmonics.size(); ++k) {
        out.harmonics[k].phase =
            wrap_phase(f.harmonics[k].phase + kTwoPi * (k + 1) * f.f0 * (t - f.time_s));
      }
    }
    return out;
  };

  if (t_s <= frames.front().time_s) return advanced(frames.front(), t_s);
  if (t_s >= frames.back().time_s) return advanced(frames.back(), t_s);
  const auto it = std::upper_bound(frames.begin(), frames.end(), t_s,
                                   [](double t, const HnmFrame& f) { return t < f.time_s; });
  const HnmFrame& r = *it;
  const HnmFrame& l = *(it - 1);
  if (t_s == l.time_s) return l;
  const double u = (t_s - l.time_s) / (r.time_s - l.time_s);

  HnmFrame out;
  out.time_s = t_s;
  if (l.voiced() && r.voiced()) {
    out.f0 = lerp(l.f0, r.f0, u);
  } else if (l.voiced() || r.voiced()) {
    out.f0 = l.voiced() ? l.f0 : r.f0;
  }
  out.mvf = lerp(l.mvf, r.mvf, u);

  const std::size_t kl = l.voiced() ? l.harmonics.size() : 0;
  const std::size_t kr = r.voiced() ? r.harmonics.size() : 0;
  const HnmFrame& nearer = u < 0.5 ? l : r;
  const HnmFrame& farther = u < 0.5 ? r : l;
  out.harmonics.resize(std::max(kl, kr));
  for (std::size_t k = 0; k < out.harmonics.size(); ++k) {
    const double al = k < kl ? l.harmonics[k].amplitude : 0.0;
    const double ar = k < kr ? r.harmonics[k].amplitude : 0.0;
    out.harmonics[k].amplitude = lerp(al, ar, u);
    const HnmFrame& src =
        nearer.voiced() && k < nearer.harmonics.size() ? nearer : farther;
    out.harmonics[k].phase =
        wrap_phase(src.harmonics[k].phase + kTwoPi * (k + 1) * src.f0 * (t_s - src.time_s));
  }

  if (l.noise_ceps.empty() || r.noise_ceps.empty()) {
    out.noise_ceps = l.noise_ceps.empty() ? r.noise_ceps : l.noise_ceps;
  } else {
    out.noise_ceps.assign(std::max(l.noise_ceps.size(), r.noise_ceps.size()), 0.0);
    for (std::size_t q = 0; q < out.noise_ceps.size(); ++q) {
      const double cl = q < l.noise_ceps.size() ? l.noise_ceps[q] : 0.0;
      const double cr = q < r.noise_ceps.size() ? r.noise_ceps[q] : 0.0;
      out.noise_ceps[q] = lerp(cl, cr, u);
    }
  }
  return out;
}

Signal resynthesize(const Signal& signal, const PitchCurve& pitch, std::uint64_t noise_seed,
                    AnalysisOptions options) {
  require_pipeline_rate(signal);
  const auto n = static_cast<std::int64_t>(signal.size());
  const auto frames = analyze_span(signal, Span{0, n}, pitch, kHop, options);
  ControlPointGrid grid;
  for (std::int64_t p = 0; p < n; p += kControlSpacing) grid.positions.push_back(p);
  if (grid.positions.back() != n - 1) grid.positions.push_back(n - 1);
  for (auto p : grid.positions) {
    grid.frames.push_back(interpolate_frames(frames, static_cast<double>(p) / signal.sample_rate));
  }
  return synthesize_stream(grid, signal.size(), noise_seed, signal.sample_rate);
}

}  // namespace hnmsing
