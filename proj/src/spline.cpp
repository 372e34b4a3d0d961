#include "hnmsing/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace hnmsing {

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), a_(y.begin(), y.end()) {
  if (x.size() != y.size() || x.empty()) {
    throw std::invalid_argument("spline needs matching non-empty knot arrays");
  }
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("spline knots must increase");
  }
  const std::size_t n = x_.size();
  b_.assign(n, 0.0);
  c_.assign(n, 0.0);
  d_.assign(n, 0.0);
  if (n == 1) return;
  if (n == 2) {
    b_[0] = b_[1] = (a_[1] - a_[0]) / (x_[1] - x_[0]);
    return;
  }

  // Thomas algorithm on the natural-spline system for the second-derivative
  // coefficients c_i (c_0 = c_{n-1} = 0).
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
  std::vector<double> diag(n, 1.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    upper[i] = h[i];
    rhs[i] = 3.0 * ((a_[i + 1] - a_[i]) / h[i] - (a_[i] - a_[i - 1]) / h[i - 1]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double lower = i + 1 < n ? h[i - 1] : 0.0;
    const double w = lower / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  c_[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) c_[i] = (rhs[i] - upper[i] * c_[i + 1]) / diag[i];

  for (std::size_t i = 0; i + 1 < n; ++i) {
    b_[i] = (a_[i + 1] - a_[i]) / h[i] - h[i] * (c_[i + 1] + 2.0 * c_[i]) / 3.0;
    d_[i] = (c_[i + 1] - c_[i]) / (3.0 * h[i]);
  }
  const double hl = h[n - 2];
  b_[n - 1] = b_[n - 2] + 2.0 * c_[n - 2] * hl + 3.0 * d_[n - 2] * hl * hl;
}

double CubicSpline::slope_at_end() const noexcept { return b_.back(); }

double CubicSpline::operator()(double x) const {
  const std::size_t n = x_.size();
  if (x <= x_.front()) {
    return linear_tails_ ? a_.front() + b_.front() * (x - x_.front()) : a_.front();
  }
  if (x >= x_.back()) {
    return linear_tails_ ? a_.back() + b_.back() * (x - x_.back()) : a_.back();
  }
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i + 1 >= n) return a_.back();
  const double dx = x - x_[i];
  return a_[i] + dx * (b_[i] + dx * (c_[i] + dx * d_[i]));
}

}  // namespace hnmsing
