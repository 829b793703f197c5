#pragma once

#include <algorithm>
#include <cmath>

namespace reebldp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) noexcept { x *= s; y *= s; return *this; }

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) noexcept = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
constexpr double norm2(Vec2 a) noexcept { return dot(a, a); }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
/// Rotation by +pi/2: (x, y) -> (-y, x).
constexpr Vec2 perp(Vec2 a) noexcept { return {-a.y, a.x}; }

/// 2x2 matrix, row-major.
struct Mat2 {
  double a = 0.0, b = 0.0;
  double c = 0.0, d = 0.0;

  constexpr double det() const noexcept { return a * d - b * c; }
  constexpr double trace() const noexcept { return a + d; }
  constexpr Vec2 operator*(Vec2 v) const noexcept { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  constexpr Mat2 transposed() const noexcept { return {a, c, b, d}; }
  friend constexpr Mat2 operator*(const Mat2& m, const Mat2& n) noexcept {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
            m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
  }
  Mat2 inverse() const noexcept {
    const double id = 1.0 / det();
    return {d * id, -b * id, -c * id, a * id};
  }
  double frobenius() const noexcept { return std::sqrt(a * a + b * b + c * c + d * d); }
  /// Spectral norm.
  double op_norm() const noexcept {
    const double s = a * a + b * b + c * c + d * d;
    const double dd = det();
    const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * dd * dd));
    return std::sqrt(0.5 * (s + disc));
  }
};

/// Eigen-decomposition of a symmetric 2x2 matrix [[p, q], [q, r]].
struct SymEigen {
  double lo = 0.0;   // smaller eigenvalue
  double hi = 0.0;   // larger eigenvalue
  Vec2 v_lo;         // unit eigenvector for lo
  Vec2 v_hi;         // unit eigenvector for hi
};

inline SymEigen sym_eigen(double p, double q, double r) noexcept {
  const double mean = 0.5 * (p + r);
  const double rad = std::hypot(0.5 * (p - r), q);
  SymEigen e;
  e.lo = mean - rad;
  e.hi = mean + rad;
  // angle of the eigenvector belonging to `hi`
  const double theta = 0.5 * std::atan2(2.0 * q, p - r);
  e.v_hi = {std::cos(theta), std::sin(theta)};
  e.v_lo = perp(e.v_hi);
  return e;
}

}  // namespace reebldp
