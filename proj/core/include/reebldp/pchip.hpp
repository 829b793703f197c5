#pragma once

#include <vector>

namespace reebldp {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson).
/// Reproduces nodes exactly and preserves monotonicity of the data.
class Pchip {
 public:
  Pchip() = default;
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  bool empty() const noexcept { return x_.empty(); }
  double x_min() const noexcept { return x_.front(); }
  double x_max() const noexcept { return x_.back(); }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& y() const noexcept { return y_; }

 private:
  std::size_t segment(double x) const;

  std::vector<double> x_, y_, d_;
};

}  // namespace reebldp
