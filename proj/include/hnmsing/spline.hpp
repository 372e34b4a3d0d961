#pragma once

#include <span>
#include <vector>

namespace hnmsing {

// Natural cubic spline through strictly increasing knots. Evaluation outside
// the knot range holds the end values unless extrapolate_linear is set, in
// which case it continues along the end slope.
class CubicSpline {
 public:
  CubicSpline(std::span<const double> x, std::span<const double> y);

  double operator()(double x) const;
  double slope_at_start() const noexcept { return b_.front(); }
  double slope_at_end() const noexcept;

  void set_extrapolate_linear(bool on) noexcept { linear_tails_ = on; }

 private:
  std::vector<double> x_, a_, b_, c_, d_;
  bool linear_tails_ = false;
};

}  // namespace hnmsing
