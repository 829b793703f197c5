#pragma once

#include <array>
#include <vector>

#include "reebldp/geometry.hpp"

namespace reebldp {

/// One term `coeff * x^i * y^j`.
struct Monomial {
  int i = 0;
  int j = 0;
  double coeff = 0.0;
};

/// Bivariate polynomial with exact symbolic differentiation.
class Poly2 {
 public:
  Poly2() = default;
  explicit Poly2(std::vector<Monomial> terms);

  static Poly2 constant(double c);

  double operator()(Vec2 p) const noexcept;
  double operator()(double x, double y) const noexcept { return (*this)({x, y}); }

  Poly2 dx() const;
  Poly2 dy() const;

  int degree() const noexcept { return degree_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept { return degree_ <= 0; }
  const std::vector<Monomial>& terms() const noexcept { return terms_; }

 private:
  std::vector<Monomial> terms_;  // merged, no zero coefficients, sorted by (i, j)
  int degree_ = -1;
  int max_i_ = 0;
  int max_j_ = 0;
};

}  // namespace reebldp
