#pragma once

#include <optional>
#include <vector>

#include "reebldp/hamiltonian.hpp"
#include "reebldp/parallel.hpp"
#include "reebldp/pchip.hpp"
#include "reebldp/reeb_graph.hpp"

namespace reebldp {

/// Closed level curve sampled at (nearly) uniform arc length. The first point
/// is not repeated at the end.
struct LevelCurve {
  int edge_id = 0;
  double h = 0.0;
  std::vector<Vec2> points;
  double length = 0.0;
  double ds = 0.0;
  double max_residual = 0.0;  // max |H(p) - h|
  double closure_gap = 0.0;   // distance between the last RK4 step and the seed
};

struct TraceOptions {
  double tol = 1e-10;
  /// Multiplies the node count of the quadrature pass.
  double refine = 1.0;
  std::size_t max_steps = 2'000'000;
};

/// Traces C_i(h). Throws GuardBand, NoClosure.
LevelCurve trace_level_curve(const HamiltonianSystem& sys, const ReebGraph& graph, int edge_id, double h,
                             const TraceOptions& opt = {});
/// Traces the level curve through `seed`.
LevelCurve trace_from_seed(const HamiltonianSystem& sys, Vec2 seed, const TraceOptions& opt = {});

struct Coeffs {
  double t = 0.0;
  double b2 = 0.0;
};

/// Periodic trapezoid quadrature of T and B^2 along the curve.
/// Throws DegenerateCurve if |grad H| < 1e-9 at a node.
Coeffs compute_coeffs(const HamiltonianSystem& sys, const LevelCurve& curve);

/// Time-parametrized oracle: one period of x' = grad^perp H from `start`,
/// with the integral of |grad H^* sigma|^2 carried along.
Coeffs flow_time_coeffs(const HamiltonianSystem& sys, Vec2 start, double rtol = 1e-12);

/// Least-squares fit T = a + b |log|h - h_s|| on a set of points.
struct LogLawFit {
  double a = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  int points = 0;
};

class EdgeCoefficientTable {
 public:
  EdgeCoefficientTable() = default;

  int edge_id = 0;
  double h_lo = 0.0;
  double h_hi = 0.0;
  bool lo_is_vertex = true;
  bool hi_is_vertex = true;
  bool lo_saddle = false;
  bool hi_saddle = false;
  double guard = 1e-4;
  std::vector<double> h_grid;
  std::vector<double> t_values;
  std::vector<double> b2_values;
  double t_lo_vertex = 0.0;  // limit of T at an extremum end
  double t_hi_vertex = 0.0;
  std::optional<LogLawFit> lo_fit;  // near-saddle log law
  std::optional<LogLawFit> hi_fit;

  /// Builds the interpolants and the F metric. Called by tabulate_edge.
  void finalize();

  /// Interpolated values; b2 = 0 at vertex values. Throws OutOfSpan.
  Coeffs lookup(double h) const;
  double b2(double h) const { return lookup(h).b2; }

  /// F(h) = integral of dh / sqrt(B^2) from h_lo.
  double f_metric(double h) const;
  /// Inverse of f_metric.
  double h_of_f(double f) const;
  double f_max() const noexcept { return f_nodes_.back(); }

  /// Integral of dh / B^2 between two energies of the edge (either order,
  /// result >= 0). Infinite when an extremum end is touched.
  double inv_b2_integral(double h1, double h2) const;

  /// max over interior grid pairs of |d(t b2)/dh|.
  double lipschitz_tb2(double h_from, double h_to) const;

 private:
  double f_segment(std::size_t k, double from, double to) const;
  double inv_b2_segment(std::size_t k, double from, double to) const;
  /// B^2 without span checks. Between a saddle and the nearest grid point it
  /// is (T B^2) / T with T from the log law and T B^2 extrapolated linearly.
  double b2_at(double h) const;
  double t_at(double h) const;

  Pchip t_interp_;
  Pchip b2_interp_;  // includes the vertex knots b2 = 0
  std::vector<double> f_h_;      // knots of the F metric
  std::vector<double> f_nodes_;  // F at the knots
  double tb2_lo_ = 0.0, tb2_lo_slope_ = 0.0;  // T B^2 at the first grid point
  double tb2_hi_ = 0.0, tb2_hi_slope_ = 0.0;  // T B^2 at the last grid point
};

struct TabulateOptions {
  int n_interior = 64;
  double guard = 1e-4;
  int per_decade = 6;
  TraceOptions trace;
};

EdgeCoefficientTable tabulate_edge(const HamiltonianSystem& sys, const ReebGraph& graph, int edge_id,
                                   const TabulateOptions& opt = {}, WorkerPool* pool = nullptr);

/// One table per edge.
class CoefficientTables {
 public:
  CoefficientTables() = default;
  explicit CoefficientTables(std::vector<EdgeCoefficientTable> tables);

  static CoefficientTables build(const HamiltonianSystem& sys, const ReebGraph& graph,
                                 const TabulateOptions& opt = {}, WorkerPool* pool = nullptr);

  /// Throws UncoveredEdge.
  const EdgeCoefficientTable& table(int edge_id) const;
  bool covers(int edge_id) const noexcept;
  Coeffs lookup(int edge_id, double h) const { return table(edge_id).lookup(h); }
  /// Smallest tabulated rotation time.
  double t_min() const;
  const std::vector<EdgeCoefficientTable>& all() const noexcept { return tables_; }

 private:
  std::vector<EdgeCoefficientTable> tables_;
};

/// Energy grid used by tabulate_edge.
std::vector<double> coefficient_grid(double h_lo, double h_hi, bool lo_vertex, bool hi_vertex,
                                     const TabulateOptions& opt);

}  // namespace reebldp
