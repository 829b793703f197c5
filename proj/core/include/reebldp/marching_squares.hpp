#pragma once

// Level-set connectivity on a uniform node grid (marching squares). Ambiguous
// saddle cells are resolved with the exact field value at the cell center.

#include <functional>
#include <optional>
#include <vector>

#include "reebldp/geometry.hpp"
#include "reebldp/hamiltonian.hpp"

namespace reebldp {

class ScalarGrid {
 public:
  ScalarGrid(const Box& box, int n, std::function<double(Vec2)> field);

  int n() const noexcept { return n_; }
  const Box& box() const noexcept { return box_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  Vec2 node(int i, int j) const noexcept { return {box_.xmin + i * dx_, box_.ymin + j * dy_}; }
  double value(int i, int j) const noexcept { return values_[static_cast<std::size_t>(j) * n_ + i]; }
  double field(Vec2 p) const { return field_(p); }
  /// Cell (i, j) containing p, clamped to the grid.
  std::pair<int, int> cell_of(Vec2 p) const noexcept;

  int horizontal_edge(int i, int j) const noexcept { return j * (n_ - 1) + i; }
  int vertical_edge(int i, int j) const noexcept { return (n_ - 1) * n_ + j * n_ + i; }
  int edge_count() const noexcept { return 2 * (n_ - 1) * n_; }

 private:
  Box box_;
  int n_;
  double dx_, dy_;
  std::vector<double> values_;
  std::function<double(Vec2)> field_;
};

/// Connected components of {field = level} as seen by marching squares.
struct LevelCensus {
  double level = 0.0;
  int components = 0;
  std::vector<int> edge_component;     // per grid edge, -1 if not crossed
  std::vector<Vec2> representative;    // one crossing point per component
  std::vector<int> crossings;          // crossing count per component
  std::vector<bool> touches_boundary;  // component reaches the grid boundary
};

LevelCensus level_census(const ScalarGrid& grid, double level);

/// Crossing point of `level` on a grid edge.
Vec2 edge_crossing(const ScalarGrid& grid, int edge, double level);

/// Component of the level curve nearest to p, searching cells within `radius`
/// cells of p's cell. Empty if no crossing is found.
std::optional<int> component_near(const ScalarGrid& grid, const LevelCensus& census, Vec2 p,
                                  int radius = 3);

/// Minimal union-find.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n);
  int find(int a);
  void unite(int a, int b);

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

}  // namespace reebldp
