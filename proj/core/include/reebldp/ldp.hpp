#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reebldp/averaged_coeffs.hpp"
#include "reebldp/parallel.hpp"
#include "reebldp/reeb_graph.hpp"
#include "reebldp/sde.hpp"

namespace reebldp {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Wilson score interval for `hits` successes out of `n`.
Interval wilson_interval(std::size_t hits, std::size_t n, double z = kWilsonZ95);

/// Weighted least squares of -log p on eps^(-beta) with an intercept.
struct RateFit {
  bool valid = false;  // at least 3 points with p > 0
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int points = 0;
  std::vector<double> residuals;  // per input point, NaN when unused
};

/// Points with p = 0 are skipped. Weights n p / max(1 - p, 1/n) (delta method).
RateFit fit_rate(std::span<const double> epsilons, std::span<const double> p, std::span<const std::size_t> n,
                 double beta);

struct TubeExperiment {
  GraphPath reference;
  double delta = 0.3;
  std::vector<double> epsilons;
  double beta = 0.5;
  std::vector<std::size_t> samples;  // one entry per epsilon, or a single entry for all
  std::uint64_t seed = 0;
  Vec2 x0;
  double dt = 1e-4;
  int record_stride = 10;
  /// Every n-th trajectory is rechecked by the slow distance path.
  std::size_t check_every = 100;
};

struct TubeLevel {
  double epsilon = 0.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  std::size_t box_exits = 0;
  double p_hat = 0.0;
  Interval ci;
  bool all_misses = false;
  double dt = 0.0;
  std::size_t rechecked = 0;
  std::size_t recheck_mismatches = 0;
};

struct TubeEstimate {
  std::vector<TubeLevel> levels;
  RateFit fit;
  bool monotone_decrease = false;  // p_hat strictly decreasing along the ladder
};

/// Tube probabilities P(rho(Y(X), reference) < delta) along the epsilon ladder.
/// Throws InvalidArgument when the reference does not start at Y(x0).
TubeEstimate estimate_tube(const HamiltonianSystem& sys, const ReebGraph& graph, const CoefficientTables& tables,
                           const TubeExperiment& exp, WorkerPool* pool = nullptr);

/// rho(path, reference) < delta, scanning the union grid and stopping at the
/// first violation.
bool in_tube(const ReebGraph& graph, const GraphPath& path, const GraphPath& reference, double delta);

struct EscapeRow {
  double k = 0.0;
  double level = 0.0;  // k eps^beta
  std::size_t hits = 0;
  double p_hat = 0.0;
  double std_error = 0.0;
};

struct EscapeReport {
  std::size_t samples = 0;
  std::vector<EscapeRow> rows;
  std::optional<double> k_star;  // smallest k with p_hat >= 1/2
  bool monotone = true;          // non-increasing in k up to 2 standard errors
};

/// P(tau_1 < T) for tau_1 the first time H(X) >= k eps^beta, all k from the
/// same trajectories. cfg.x0 must be an extremum; cfg.stream is ignored in
/// favour of (seed, "ldp.escape").
EscapeReport escape_extremum_probe(const HamiltonianSystem& sys, const ReebGraph& graph, const SimulationConfig& cfg,
                                   std::span<const double> k_grid, std::size_t samples, std::uint64_t seed,
                                   WorkerPool* pool = nullptr);

enum class BrownianCase { I, II, III };

struct BrownianParams {
  BrownianCase which = BrownianCase::I;
  double a = 0.4;
  double d = 0.1;
  double beta = 0.5;
  double kappa = 0.05;
  double epsilon = 0.05;
  double horizon = 1.0;
  double amplitude = 1.0;  // A in case III
  std::size_t paths = 1'000'000;
  int steps = 256;
  std::uint64_t seed = 0;
};

struct BrownianReport {
  BrownianCase which = BrownianCase::I;
  bool admissible = false;  // parameter constraints of the case hold
  double bound = 0.0;
  bool vacuous = false;     // bound >= 1
  double estimate = 0.0;    // bridge-corrected Monte Carlo
  double std_error = 0.0;
  double exact = 0.0;       // reflection-principle closed form
  bool passed = false;      // estimate >= bound
  std::string note;
};

/// The barrier events on Y = eps^(beta/2) W. Barrier crossings between grid
/// points are accounted for by the Brownian bridge survival probability.
BrownianReport brownian_saddle_oracle(const BrownianParams& p, WorkerPool* pool = nullptr);

struct ReflectionReport {
  double level = 1.0;
  double horizon = 1.0;
  double estimate = 0.0;      // bridge-corrected P(max W >= level)
  double std_error = 0.0;
  double grid_estimate = 0.0; // fraction of paths whose grid maximum crosses
  double closed_form = 0.0;   // 2 P(W_T >= level)
  double rel_error = 0.0;
};

ReflectionReport reflection_check(double level, double horizon, std::size_t paths, int steps, std::uint64_t seed,
                                  WorkerPool* pool = nullptr);

struct QvReport {
  double realized = 0.0;   // sum of (dH)^2
  double predicted = 0.0;  // eps^beta times the integral of B^2(H_s)
  double ratio = 1.0;      // 1 when both sides vanish
};

/// Needs record.graph_path. Throws UncoveredEdge, InvalidArgument.
QvReport quadratic_variation_check(const TrajectoryRecord& record, const CoefficientTables& tables, double epsilon,
                                   double beta);

struct QvEnsemble {
  std::vector<QvReport> runs;
  double mean_ratio = 0.0;
  double std_error = 0.0;
};

/// `seeds` trajectories of the rescaled equation from cfg.x0, streams from
/// (seed, "ldp.qv").
QvEnsemble quadratic_variation_ensemble(const HamiltonianSystem& sys, const ReebGraph& graph,
                                        const CoefficientTables& tables, const SimulationConfig& cfg,
                                        std::size_t seeds, std::uint64_t seed, WorkerPool* pool = nullptr);

}  // namespace reebldp
