#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reebldp/geometry.hpp"
#include "reebldp/polynomial.hpp"

namespace reebldp {

/// Axis-aligned working box [xmin, xmax] x [ymin, ymax].
struct Box {
  double xmin = -1.0;
  double xmax = 1.0;
  double ymin = -1.0;
  double ymax = 1.0;

  bool contains(Vec2 p) const noexcept {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  double width() const noexcept { return xmax - xmin; }
  double height() const noexcept { return ymax - ymin; }
  Vec2 center() const noexcept { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
};

inline constexpr int kMaxNoiseDim = 4;

/// Value of the 2 x l noise matrix at a point. Column k is (m[2k], m[2k+1]).
struct SigmaValue {
  int cols = 0;
  std::array<double, 2 * kMaxNoiseDim> m{};

  double row0(int k) const noexcept { return m[2 * k]; }
  double row1(int k) const noexcept { return m[2 * k + 1]; }
  /// sigma * xi for a noise vector of length `cols`.
  Vec2 apply(std::span<const double> xi) const noexcept {
    Vec2 r;
    for (int k = 0; k < cols; ++k) {
      r.x += m[2 * k] * xi[k];
      r.y += m[2 * k + 1] * xi[k];
    }
    return r;
  }
  /// a = sigma sigma^*.
  Mat2 diffusion() const noexcept {
    Mat2 a;
    for (int k = 0; k < cols; ++k) {
      a.a += m[2 * k] * m[2 * k];
      a.b += m[2 * k] * m[2 * k + 1];
      a.d += m[2 * k + 1] * m[2 * k + 1];
    }
    a.c = a.b;
    return a;
  }
};

/// The 2 x l diffusion matrix field, either constant or with polynomial entries.
class Sigma {
 public:
  static Sigma identity(int l = 2);
  static Sigma constant(const std::vector<std::vector<double>>& rows);
  /// entries[r][k] is the polynomial in row r, column k.
  static Sigma polynomial(std::vector<std::vector<Poly2>> entries);

  int cols() const noexcept { return cols_; }
  bool is_constant() const noexcept { return constant_; }
  SigmaValue operator()(Vec2 p) const noexcept;

 private:
  int cols_ = 0;
  bool constant_ = true;
  SigmaValue value_;                // constant case
  std::vector<Poly2> entries_;      // column-major, polynomial case
};

/// Everything Ito's formula needs for H at one point.
struct FieldSample {
  double h = 0.0;
  Vec2 grad;
  Mat2 hess;
  double ah = 0.0;  // (1/2) sum_ij a_ij d_ij H
  double g2 = 0.0;  // |grad H^* sigma|^2
};

/// Hamiltonian H with noise matrix sigma on a working box. Immutable.
class HamiltonianSystem {
 public:
  HamiltonianSystem(std::string name, Poly2 h, Sigma sigma, Box box);

  /// "harmonic", "doublewell" or "canonical_saddle".
  static HamiltonianSystem builtin(std::string_view name);
  static HamiltonianSystem builtin(std::string_view name, Sigma sigma);
  static Box default_box(std::string_view builtin_name);

  double h(Vec2 p) const noexcept { return h_(p); }
  Vec2 grad(Vec2 p) const noexcept { return {hx_(p), hy_(p)}; }
  Mat2 hess(Vec2 p) const noexcept {
    const double xy = hxy_(p);
    return {hxx_(p), xy, xy, hyy_(p)};
  }
  /// Hamiltonian vector field grad^perp H = (-H_y, H_x).
  Vec2 flow(Vec2 p) const noexcept { return {-hy_(p), hx_(p)}; }
  SigmaValue sigma(Vec2 p) const noexcept { return sigma_(p); }
  int noise_dim() const noexcept { return sigma_.cols(); }

  FieldSample evaluate(Vec2 p) const noexcept;

  const Poly2& hamiltonian() const noexcept { return h_; }
  const Sigma& sigma_field() const noexcept { return sigma_; }
  const Box& box() const noexcept { return box_; }
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
  Poly2 h_, hx_, hy_, hxx_, hxy_, hyy_;
  Sigma sigma_;
  Box box_;
};

enum class CriticalKind { Minimum, Maximum, Saddle };
std::string_view to_string(CriticalKind k);

struct CriticalPoint {
  Vec2 location;
  double h_value = 0.0;
  CriticalKind kind = CriticalKind::Minimum;
  std::array<double, 2> hess_eigenvalues{};  // ascending
};

/// Newton refinement from the sign-change cells of a grid_n x grid_n grid.
/// Result is deduplicated and sorted by (h_value, x, y).
std::vector<CriticalPoint> find_critical_points(const HamiltonianSystem& sys, const Box& box,
                                                int grid_n = 64);

struct AssumptionCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  std::map<std::string, double> values;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;
  bool all_passed() const noexcept;
  const AssumptionCheck* find(std::string_view name) const noexcept;
};

/// Advisory check of the standing assumptions. Never throws for a failing
/// assumption; failures are recorded in the report.
AssumptionReport check_assumptions(const HamiltonianSystem& sys, const Box& box, double ring_radius,
                                   int grid_n = 64);

/// min over a punctured-ball sample of 4 (H - H(x0)) AH - |grad H^* sigma|^2.
/// Throws BadKind unless `minimum` is a minimum.
double positive_drift_margin(const HamiltonianSystem& sys, const CriticalPoint& minimum,
                             double radius, int n_radii = 100, int n_angles = 100);

}  // namespace reebldp
