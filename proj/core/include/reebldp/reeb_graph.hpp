#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reebldp/hamiltonian.hpp"
#include "reebldp/marching_squares.hpp"

namespace reebldp {

struct ReebVertex {
  int id = 0;
  CriticalPoint critical;
  bool interior = false;   // saddle
  std::vector<int> edges;  // incident edge ids, ascending
};

/// A point on one level-set component of the edge, used to seed tracing.
struct EdgeAnchor {
  int probe = 0;
  double level = 0.0;
  Vec2 point;
};

struct ReebEdge {
  int id = 0;
  double h_lo = 0.0;
  double h_hi = 0.0;  // H_max of the box for the unbounded edge
  int v_lo = -1;
  int v_hi = -1;      // -1 for the unbounded edge
  bool unbounded = false;
  std::vector<EdgeAnchor> anchors;  // ascending level
};

struct GraphPoint {
  int edge_id = 0;
  double h = 0.0;
  std::optional<int> at_vertex;

  friend bool operator==(const GraphPoint&, const GraphPoint&) = default;
};

/// Uniformly time-sampled path on the graph.
struct GraphPath {
  std::vector<double> times;
  std::vector<GraphPoint> samples;

  double horizon() const noexcept { return times.empty() ? 0.0 : times.back(); }
  std::size_t size() const noexcept { return samples.size(); }
};

struct ReebBuildOptions {
  int grid_n = 512;
};

/// Follows dx/dh = grad H / |grad H|^2 from x to the level `target`.
/// Throws NonConvergence if the walk stalls at a critical point.
Vec2 gradient_walk(const HamiltonianSystem& sys, Vec2 x, double target);

class ReebGraph {
 public:
  /// Throws EqualSaddleLevels or AmbiguousWiring.
  static ReebGraph build(const HamiltonianSystem& sys, const std::vector<CriticalPoint>& critical,
                         const Box& box, const ReebBuildOptions& opt = {});
  static ReebGraph build(const HamiltonianSystem& sys, const ReebBuildOptions& opt = {});

  const std::vector<ReebVertex>& vertices() const noexcept { return vertices_; }
  const std::vector<ReebEdge>& edges() const noexcept { return edges_; }
  const ReebEdge& edge(int id) const;
  const ReebVertex& vertex(int id) const;
  double h_max() const noexcept { return h_max_; }
  const Box& box() const noexcept { return box_; }
  int grid_n() const noexcept { return grid_.n(); }
  int unbounded_edge() const noexcept { return unbounded_edge_; }
  /// Sorted distinct critical values.
  const std::vector<double>& critical_levels() const noexcept { return levels_; }
  const std::vector<double>& probe_levels() const noexcept { return probes_; }

  /// True if the edges are equal or share a vertex.
  bool adjacent(int e1, int e2) const;
  /// Vertex shared by two distinct edges, if any.
  std::optional<int> common_vertex(int e1, int e2) const;
  /// Vertex of `edge` at level h (within 1e-12 relative), if any.
  std::optional<int> vertex_at(int edge, double h) const;

  /// Y(x). Throws OutsideBox.
  GraphPoint project(const HamiltonianSystem& sys, Vec2 x) const;

  /// Point on the level-set component of `edge` at level h.
  Vec2 seed_point(const HamiltonianSystem& sys, int edge, double h) const;

  /// Shortest-path length with |dH| edge weights.
  double distance(const GraphPoint& a, const GraphPoint& b) const;

  nlohmann::json to_json() const;

 private:
  ReebGraph(const HamiltonianSystem& sys, const Box& box, int grid_n);

  Box box_;
  ScalarGrid grid_;
  double h_max_ = 0.0;
  std::vector<double> levels_;
  std::vector<double> probes_;
  std::vector<LevelCensus> census_;                // per probe
  std::vector<std::vector<int>> probe_comp_edge_;  // per probe, component -> edge id
  std::vector<ReebVertex> vertices_;
  std::vector<ReebEdge> edges_;
  std::vector<std::vector<double>> vdist_;  // all-pairs vertex distance
  int unbounded_edge_ = -1;
};

/// r(y1, y2).
inline double graph_distance(const ReebGraph& g, const GraphPoint& a, const GraphPoint& b) {
  return g.distance(a, b);
}

/// Point of `path` at time t, linear in h along edges.
GraphPoint sample_path(const ReebGraph& g, const GraphPath& path, double t);

/// rho_{0,T}: sup of r over the union of both time grids. Throws GridMismatch
/// if the horizons differ.
double path_distance(const ReebGraph& g, const GraphPath& p1, const GraphPath& p2);

/// Edge identity by continuity, with a full projection every `resync` points.
class TrajectoryProjector {
 public:
  TrajectoryProjector(const HamiltonianSystem& sys, const ReebGraph& graph, int resync = 64);

  /// Throws ContinuityBreak on a jump between non-adjacent edges.
  GraphPoint push(Vec2 x);
  void reset() noexcept { count_ = 0; current_.reset(); }
  std::size_t full_projections() const noexcept { return full_; }

 private:
  const HamiltonianSystem* sys_;
  const ReebGraph* graph_;
  int resync_;
  std::size_t count_ = 0;
  std::size_t full_ = 0;
  std::optional<GraphPoint> current_;
};

GraphPath project_trajectory(const HamiltonianSystem& sys, const ReebGraph& graph,
                             std::span<const Vec2> xs, std::span<const double> times,
                             int resync = 64);

}  // namespace reebldp
