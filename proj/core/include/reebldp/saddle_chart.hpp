#pragma once

#include <vector>

#include "reebldp/hamiltonian.hpp"

namespace reebldp {

struct ChartOptions {
  double l = 0.3;
  double residual_tol = 1e-8;
  int validation_n = 64;
  int max_shrinks = 3;
  double shrink = 0.7;
};

/// Morse chart psi: (mu, nu) -> x around a nondegenerate saddle with
/// H(psi(mu, nu)) - H(saddle) = mu^2 - nu^2 on U0 = [-4l, 4l] x [-2l, 2l].
/// The inverse is built by completing the square in the integral Taylor form
/// H(s + d) - H(s) = d^T Q(d) d; psi is recovered by Newton iteration.
class SaddleChart {
 public:
  /// Throws BadKind for a non-saddle, ChartFail when validation fails after
  /// the allowed shrinks of l.
  static SaddleChart build(const HamiltonianSystem& sys, const CriticalPoint& saddle, const ChartOptions& opt = {});

  double l() const noexcept { return l_; }
  Vec2 center() const noexcept { return center_; }
  double h_saddle() const noexcept { return h0_; }
  /// True when nu was negated to make det J_psi positive.
  bool flipped() const noexcept { return flipped_; }
  int shrinks() const noexcept { return shrinks_; }
  /// Bound on the norms of psi, psi^-1, their Jacobians, det J_psi and its gradient over U0.
  double m_bar() const noexcept { return m_bar_; }
  double max_residual() const noexcept { return max_residual_; }
  double max_det() const noexcept { return max_det_; }

  /// psi^-1. Throws OutsideChart where the square cannot be completed.
  Vec2 to_chart(Vec2 x) const;
  /// psi. Throws OutsideChart if Newton fails.
  Vec2 from_chart(Vec2 mn) const;
  Mat2 jacobian_inverse_map(Vec2 x) const;  // J_{psi^-1} at x
  double det_jpsi(Vec2 mn) const;

  bool in_u(Vec2 mn) const noexcept { return std::abs(mn.x) <= 2.0 * l_ && std::abs(mn.y) <= l_; }
  bool in_u0(Vec2 mn) const noexcept { return std::abs(mn.x) <= 4.0 * l_ && std::abs(mn.y) <= 2.0 * l_; }

  const HamiltonianSystem& system() const noexcept { return *sys_; }

 private:
  SaddleChart() = default;
  bool raw_chart(Vec2 x, Vec2& mn) const noexcept;
  bool validate(const ChartOptions& opt);

  const HamiltonianSystem* sys_ = nullptr;
  Vec2 center_;
  double h0_ = 0.0;
  Vec2 e_plus_, e_minus_;
  double l_ = 0.3;
  bool flipped_ = false;
  int shrinks_ = 0;
  double m_bar_ = 0.0;
  double max_residual_ = 0.0;
  double max_det_ = 0.0;
  double scale_plus_ = 1.0, scale_minus_ = 1.0;  // linear inverse for the Newton start
};

/// T(mu, nu) = 1/2 int_nu^l det J_psi(sqrt(y^2 + G), y) / sqrt(y^2 + G) dy,
/// evaluated with y = sqrt(G) sinh u. Requires (mu, nu) in U, mu > 0 and
/// 0 < G < 3 l^2; throws OutsideChart otherwise.
double transit_time(const SaddleChart& chart, double mu, double nu);

/// Exit time of x' = grad^perp H from psi(mu, nu) through nu = l (ODE oracle).
double flow_exit_time(const SaddleChart& chart, double mu, double nu, double rtol = 1e-12);

/// M_bar [log(l + sqrt(l^2 + h)) - log(h) / 2].
double transit_log_bound(const SaddleChart& chart, double h);

struct DerivativeSample {
  double mu = 0.0, nu = 0.0, g = 0.0;
  double dt_dmu = 0.0, dt_dnu = 0.0;
  double c = 0.0;  // max(|dT/dmu|, |dT/dnu|) * G
};

struct DerivativeReport {
  std::vector<DerivativeSample> samples;
  double c_min = 0.0;  // smallest C with |dT| <= C / H at every sample
};

/// Central differences of transit_time at each (mu, nu).
DerivativeReport transit_derivative_bounds(const SaddleChart& chart, const std::vector<Vec2>& samples);

}  // namespace reebldp
