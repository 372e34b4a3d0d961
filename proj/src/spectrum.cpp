#include "spectrum.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hnmsing::detail {
namespace {

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const { fftw_destroy_plan(p); }
};

struct CachedPlan {
  std::unique_ptr<fftw_plan_s, PlanDeleter> plan;
};

// Planning is not thread-safe in FFTW; executing a cached plan on new arrays is.
fftw_plan plan_for(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, CachedPlan> plans;
  std::lock_guard lock(mu);
  auto it = plans.find(n);
  if (it == plans.end()) {
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    if (p == nullptr) throw std::runtime_error("fftw planning failed");
    it = plans.emplace(n, CachedPlan{std::unique_ptr<fftw_plan_s, PlanDeleter>(p)}).first;
  }
  return it->second.plan.get();
}

}  // namespace

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                  static_cast<double>(n - 1));
  }
  return w;
}

std::vector<double> magnitude_spectrum(std::span<const double> frame,
                                       std::span<const double> window, std::size_t fft_size) {
  if (frame.size() > fft_size || window.size() != frame.size()) {
    throw std::invalid_argument("frame/window/fft size mismatch");
  }
  const fftw_plan plan = plan_for(fft_size);
  std::unique_ptr<double, decltype(&fftw_free)> in(fftw_alloc_real(fft_size), &fftw_free);
  std::unique_ptr<fftw_complex, decltype(&fftw_free)> out(fftw_alloc_complex(fft_size / 2 + 1),
                                                          &fftw_free);
  std::fill(in.get(), in.get() + fft_size, 0.0);
  for (std::size_t i = 0; i < frame.size(); ++i) in.get()[i] = frame[i] * window[i];
  fftw_execute_dft_r2c(plan, in.get(), out.get());
  std::vector<double> mag(fft_size / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) {
    mag[k] = std::hypot(out.get()[k][0], out.get()[k][1]);
  }
  return mag;
}

std::complex<double> dtft_at(std::span<const double> frame, std::span<const double> window,
                             double freq_hz, double sample_rate, double center) {
  const double w = 2.0 * std::numbers::pi * freq_hz / sample_rate;
  // Rotate a unit phasor instead of calling sin/cos per sample.
  const std::complex<double> step = std::polar(1.0, -w);
  std::complex<double> phasor = std::polar(1.0, w * center);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t n = 0; n < frame.size(); ++n) {
    acc += frame[n] * window[n] * phasor;
    phasor *= step;
  }
  return acc;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    m = 0.5 * (m + *std::max_element(values.begin(), values.begin() +
                                                        static_cast<std::ptrdiff_t>(mid)));
  }
  return m;
}

}  // namespace hnmsing::detail
