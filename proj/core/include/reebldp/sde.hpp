#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "reebldp/hamiltonian.hpp"
#include "reebldp/reeb_graph.hpp"
#include "reebldp/rng.hpp"

namespace reebldp {

/// Rescaled dynamics dX = eps^(beta-1) grad^perp H dt + eps^(beta/2) sigma dW.
struct SimulationConfig {
  double epsilon = 0.1;
  double beta = 0.5;
  double horizon = 1.0;
  double dt = 1e-4;
  Vec2 x0;
  std::uint64_t stream = 0;       // key of the normal stream
  std::uint32_t trajectory = 0;   // counter word; one path per value
  int record_stride = 1;
  bool project = true;            // fill graph_path when a graph is given
};

/// Largest admissible step: c_dt eps^(1-beta) with c_dt = 0.05.
double max_dt(double epsilon, double beta) noexcept;

/// Step actually used: min(dt, 0.02 eps^(1-beta) t_min), shrunk so that the
/// horizon is a whole number of steps. Throws StepTooLarge, InvalidArgument.
double effective_dt(const SimulationConfig& cfg, double t_min = std::numeric_limits<double>::infinity());

enum class ExitStatus { Completed, BoxExit };

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vec2> states;
  std::vector<double> h_series;
  std::vector<double> qv_series;        // running sum of (dH)^2
  std::vector<double> drift_integral;   // running eps^beta * sum AH dt
  std::vector<double> martingale;       // running eps^(beta/2) * sum grad H . sigma dW
  GraphPath graph_path;                 // empty unless projected
  ExitStatus status = ExitStatus::Completed;
  double exit_time = std::numeric_limits<double>::quiet_NaN();
  Vec2 exit_state;
  std::size_t steps = 0;
  double dt = 0.0;

  /// H(X_t) - H(x0) - drift - martingale at record k.
  double ito_residual(std::size_t k) const noexcept {
    return h_series[k] - h_series.front() - drift_integral[k] - martingale[k];
  }
};

/// Adaptive orbit of x' = grad^perp H, one record per accepted step.
/// Throws BoxExit.
TrajectoryRecord integrate_flow(const HamiltonianSystem& sys, Vec2 x0, double horizon, double tol = 1e-12);

/// One Euler-Maruyama step x + a F(x) dt + b sigma(x) dw, with dw already
/// scaled by sqrt(dt).
Vec2 em_step(const HamiltonianSystem& sys, Vec2 x, double a, double b, double dt, std::span<const double> dw);

/// Euler-Maruyama for the rescaled equation. Increments for step k come from
/// NormalStream(cfg.stream) at (cfg.trajectory, k). Leaving the box stops the
/// run and sets status = BoxExit. Throws StepTooLarge.
TrajectoryRecord simulate(const HamiltonianSystem& sys, const SimulationConfig& cfg, const ReebGraph* graph = nullptr,
                          double t_min = std::numeric_limits<double>::infinity());

/// The unscaled equation dX = grad^perp H dt + sqrt(eps) sigma dW on original
/// time, driven by the same stream layout as simulate: with dt_orig =
/// eps^(beta-1) dt the two runs see identical normals step for step.
TrajectoryRecord simulate_original(const HamiltonianSystem& sys, double epsilon, double horizon, double dt, Vec2 x0,
                                   std::uint64_t stream, std::uint32_t trajectory, int record_stride = 1);

}  // namespace reebldp
