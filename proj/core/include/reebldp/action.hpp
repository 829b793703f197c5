#pragma once

#include <optional>
#include <string>
#include <vector>

#include "reebldp/averaged_coeffs.hpp"
#include "reebldp/reeb_graph.hpp"

namespace reebldp {

struct ActionOptions {
  /// Cells moving through B^2 <= b2_floor away from vertices cost +inf.
  double b2_floor = 1e-10;
};

struct ActionValue {
  double value = 0.0;             // +inf for inadmissible paths
  std::vector<double> breakdown;  // one entry per time cell
  double vertex_dwell = 0.0;      // time spent at vertex levels
  int vertex_crossings = 0;       // cells that pass through a vertex

  bool finite() const noexcept;
};

/// S(phi) = 1/2 int phi'^2 / B^2 dt for a path that is linear in h on each
/// cell: the cell cost is (1/2) (|dh| / dt) |int dh / B^2|, split at a vertex
/// when the cell changes edge. Throws UncoveredEdge.
ActionValue evaluate_action(const CoefficientTables& tables, const ReebGraph& graph, const GraphPath& path,
                            const ActionOptions& opt = {});

/// Distances on the graph measured in F = int dh / sqrt(B^2).
class FMetric {
 public:
  FMetric(const CoefficientTables& tables, const ReebGraph& graph);

  double f(const GraphPoint& p) const;
  double edge_length(int edge) const { return lengths_.at(static_cast<std::size_t>(edge)); }
  double distance(const GraphPoint& a, const GraphPoint& b) const;

 private:
  const CoefficientTables* tables_;
  const ReebGraph* graph_;
  std::vector<double> lengths_;
  std::vector<std::vector<double>> vdist_;
};

struct RouteLeg {
  int edge_id = 0;
  double h_from = 0.0;
  double h_to = 0.0;
  double f_length = 0.0;
};

/// Unique simple route between two points of the (tree) graph.
std::vector<RouteLeg> graph_route(const CoefficientTables& tables, const ReebGraph& graph, const GraphPoint& a,
                                  const GraphPoint& b);

/// Constant F-speed path along a route on a uniform grid of n cells.
GraphPath constant_speed_path(const CoefficientTables& tables, const ReebGraph& graph,
                              const std::vector<RouteLeg>& route, double horizon, int n);

struct Tube {
  GraphPath reference;
  double delta = 0.0;  // closed tube in the graph metric r
};

struct MinimizeOptions {
  int n_time = 400;
  int n_h = 400;
  bool run_dp = true;
  std::optional<Tube> tube;
  /// End anywhere in the tube at the horizon instead of at y1.
  bool free_end = false;
};

struct MinActionResult {
  GraphPath path;
  ActionValue action;            // evaluate_action(path)
  double s = 0.0;                // minimum action
  double lagrange_energy = 0.0;  // E = (1/2) phi'^2 / B^2
  double dp_value = 0.0;         // NaN when the DP is skipped
  double shooting_value = 0.0;   // D^2 / (2T) along the final route
  std::vector<RouteLeg> route;
  std::string method;            // "shooting" or "dp"
  std::size_t dp_nodes = 0;
};

/// Single edge: first-integral shooting, S = (F(h1) - F(h0))^2 / (2T).
/// Across vertices: DP over (time, F-lattice node) with cost
/// (1/2) d_F^2 / dt per step, then the route it selects is re-solved by
/// shooting. Throws Unreachable.
MinActionResult minimize_action(const CoefficientTables& tables, const ReebGraph& graph, const GraphPoint& y0,
                                const GraphPoint& y1, double horizon, const MinimizeOptions& opt = {});

struct ZeroSpeedReport {
  bool applicable = false;
  std::string note;
  std::vector<double> dts;
  std::vector<double> quotients;  // |h(dt) - h(0)| / dt
  double exponent = 0.0;          // slope of log quotient against log dt
  bool satisfied = false;         // exponent > 0 and quotients decrease
};

/// Departure difference quotients for a refinement sequence of paths.
ZeroSpeedReport zero_speed_report(const ReebGraph& graph, const std::vector<GraphPath>& refinements);

/// Minimizes from y0 at each n_time and reports the departure speed. Skipped
/// unless y0 is an exterior vertex.
ZeroSpeedReport zero_speed_at_exterior_vertex_check(const CoefficientTables& tables, const ReebGraph& graph,
                                                    const GraphPoint& y0, const GraphPoint& y1, double horizon,
                                                    const std::vector<int>& n_times = {100, 1000, 10000});

}  // namespace reebldp
