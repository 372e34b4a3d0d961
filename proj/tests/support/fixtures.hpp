#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "hnmsing/error.hpp"
#include "hnmsing/signal_io.hpp"

namespace fixtures {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Partial {
  double freq;
  double amp;
  double phase = 0.0;
};

inline hnmsing::Signal tones(std::span<const Partial> partials, std::size_t n,
                             int sr = hnmsing::kSampleRate) {
  hnmsing::Signal s;
  s.sample_rate = sr;
  s.samples.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& p : partials) {
      s.samples[i] += p.amp * std::cos(kTwoPi * p.freq * static_cast<double>(i) / sr + p.phase);
    }
  }
  return s;
}

inline hnmsing::Signal harmonics(double f0, std::vector<double> amps, std::size_t n,
                                 int sr = hnmsing::kSampleRate) {
  std::vector<Partial> ps;
  for (std::size_t k = 0; k < amps.size(); ++k) {
    ps.push_back({f0 * static_cast<double>(k + 1), amps[k], 0.3 * static_cast<double>(k)});
  }
  return tones(ps, n, sr);
}

inline hnmsing::Signal white_noise(std::size_t n, double amp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-amp, amp);
  hnmsing::Signal s;
  s.samples.resize(n);
  for (auto& v : s.samples) v = d(rng);
  return s;
}

inline double snr_db(std::span<const double> ref, std::span<const double> test, std::size_t skip) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = skip; i + skip < ref.size() && i < test.size(); ++i) {
    num += ref[i] * ref[i];
    den += (ref[i] - test[i]) * (ref[i] - test[i]);
  }
  return 10.0 * std::log10(num / std::max(den, 1e-300));
}

inline double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

// Kind of the hnmsing::Error thrown by fn; records a failure if none is thrown.
template <class Fn>
hnmsing::ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const hnmsing::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return hnmsing::ErrorKind::Usage;
}

}  // namespace fixtures
