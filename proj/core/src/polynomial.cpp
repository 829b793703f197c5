#include "reebldp/polynomial.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "reebldp/errors.hpp"

namespace reebldp {

namespace {
constexpr int kMaxPower = 31;
}

Poly2::Poly2(std::vector<Monomial> terms) {
  std::map<std::pair<int, int>, double> merged;
  for (const auto& t : terms) {
    if (t.i < 0 || t.j < 0 || t.i > kMaxPower || t.j > kMaxPower) {
      throw Error(ErrorCode::ConfigError, "polynomial exponent out of range");
    }
    merged[{t.i, t.j}] += t.coeff;
  }
  for (const auto& [key, c] : merged) {
    if (c != 0.0) {
      terms_.push_back({key.first, key.second, c});
      degree_ = std::max(degree_, key.first + key.second);
      max_i_ = std::max(max_i_, key.first);
      max_j_ = std::max(max_j_, key.second);
    }
  }
}

Poly2 Poly2::constant(double c) { return Poly2({{0, 0, c}}); }

double Poly2::operator()(Vec2 p) const noexcept {
  std::array<double, kMaxPower + 1> px;
  std::array<double, kMaxPower + 1> py;
  px[0] = 1.0;
  py[0] = 1.0;
  for (int k = 1; k <= max_i_; ++k) px[k] = px[k - 1] * p.x;
  for (int k = 1; k <= max_j_; ++k) py[k] = py[k - 1] * p.y;
  double s = 0.0;
  for (const auto& t : terms_) s += t.coeff * px[t.i] * py[t.j];
  return s;
}

Poly2 Poly2::dx() const {
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    if (t.i > 0) out.push_back({t.i - 1, t.j, t.coeff * t.i});
  }
  return Poly2(std::move(out));
}

Poly2 Poly2::dy() const {
  std::vector<Monomial> out;
  for (const auto& t : terms_) {
    if (t.j > 0) out.push_back({t.i, t.j - 1, t.coeff * t.j});
  }
  return Poly2(std::move(out));
}

}  // namespace reebldp
