#pragma once

// Internal spectral helpers shared by segmentation and hnm analysis.

#include <complex>
#include <span>
#include <vector>

namespace hnmsing::detail {

std::vector<double> hamming(std::size_t n);

// |DFT| of the windowed frame zero-padded to fft_size, bins 0..fft_size/2.
std::vector<double> magnitude_spectrum(std::span<const double> frame, std::span<const double> window,
                                       std::size_t fft_size);

// Windowed DTFT at freq_hz with phase referenced to sample index `center`.
std::complex<double> dtft_at(std::span<const double> frame, std::span<const double> window,
                             double freq_hz, double sample_rate, double center);

double median(std::vector<double> values);

}  // namespace hnmsing::detail
