#include "reebldp/marching_squares.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include "reebldp/errors.hpp"

namespace reebldp {

DisjointSets::DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
  std::iota(parent_.begin(), parent_.end(), 0);
}

int DisjointSets::find(int a) {
  while (parent_[a] != a) {
    parent_[a] = parent_[parent_[a]];
    a = parent_[a];
  }
  return a;
}

void DisjointSets::unite(int a, int b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

ScalarGrid::ScalarGrid(const Box& box, int n, std::function<double(Vec2)> field)
    : box_(box), n_(n), field_(std::move(field)) {
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "grid needs at least 4 nodes per axis");
  dx_ = box.width() / (n - 1);
  dy_ = box.height() / (n - 1);
  values_.resize(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) values_[static_cast<std::size_t>(j) * n + i] = field_(node(i, j));
}

std::pair<int, int> ScalarGrid::cell_of(Vec2 p) const noexcept {
  int i = static_cast<int>(std::floor((p.x - box_.xmin) / dx_));
  int j = static_cast<int>(std::floor((p.y - box_.ymin) / dy_));
  i = std::clamp(i, 0, n_ - 2);
  j = std::clamp(j, 0, n_ - 2);
  return {i, j};
}

namespace {

struct CellEdges {
  std::array<int, 4> edge;  // bottom, right, top, left
};

CellEdges cell_edges(const ScalarGrid& g, int i, int j) {
  return {{g.horizontal_edge(i, j), g.vertical_edge(i + 1, j), g.horizontal_edge(i, j + 1),
           g.vertical_edge(i, j)}};
}

// Segment pairs (indices into CellEdges) for one cell; returns number of segments.
int cell_segments(const ScalarGrid& g, int i, int j, double level,
                  std::array<std::pair<int, int>, 2>& segs) {
  const bool s0 = g.value(i, j) > level;
  const bool s1 = g.value(i + 1, j) > level;
  const bool s2 = g.value(i + 1, j + 1) > level;
  const bool s3 = g.value(i, j + 1) > level;
  const std::array<bool, 4> crossed = {s0 != s1, s1 != s2, s3 != s2, s0 != s3};
  const int count = static_cast<int>(std::count(crossed.begin(), crossed.end(), true));
  if (count == 0) return 0;
  if (count == 2) {
    int a = -1, b = -1;
    for (int k = 0; k < 4; ++k) {
      if (!crossed[k]) continue;
      if (a < 0) a = k; else b = k;
    }
    segs[0] = {a, b};
    return 1;
  }
  // ambiguous: corners 0 and 2 share a state, 1 and 3 the other
  const Vec2 c = g.node(i, j) + Vec2{0.5 * g.dx(), 0.5 * g.dy()};
  const bool sc = g.field(c) > level;
  if (sc == s0) {
    segs[0] = {0, 1};  // isolates corner 1
    segs[1] = {2, 3};  // isolates corner 3
  } else {
    segs[0] = {0, 3};  // isolates corner 0
    segs[1] = {1, 2};  // isolates corner 2
  }
  return 2;
}

}  // namespace

Vec2 edge_crossing(const ScalarGrid& g, int edge, double level) {
  const int n = g.n();
  const int h_count = (n - 1) * n;
  int i0, j0, i1, j1;
  if (edge < h_count) {
    j0 = edge / (n - 1);
    i0 = edge % (n - 1);
    i1 = i0 + 1;
    j1 = j0;
  } else {
    const int e = edge - h_count;
    j0 = e / n;
    i0 = e % n;
    i1 = i0;
    j1 = j0 + 1;
  }
  const double f0 = g.value(i0, j0) - level;
  const double f1 = g.value(i1, j1) - level;
  const double t = (f0 == f1) ? 0.5 : std::clamp(f0 / (f0 - f1), 0.0, 1.0);
  const Vec2 p0 = g.node(i0, j0);
  const Vec2 p1 = g.node(i1, j1);
  return p0 + t * (p1 - p0);
}

LevelCensus level_census(const ScalarGrid& g, double level) {
  const int n = g.n();
  DisjointSets sets(static_cast<std::size_t>(g.edge_count()));
  std::vector<char> used(static_cast<std::size_t>(g.edge_count()), 0);
  std::array<std::pair<int, int>, 2> segs;
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const int ns = cell_segments(g, i, j, level, segs);
      if (ns == 0) continue;
      const CellEdges ce = cell_edges(g, i, j);
      for (int s = 0; s < ns; ++s) {
        const int a = ce.edge[segs[s].first];
        const int b = ce.edge[segs[s].second];
        used[a] = used[b] = 1;
        sets.unite(a, b);
      }
    }
  }
  LevelCensus out;
  out.level = level;
  out.edge_component.assign(static_cast<std::size_t>(g.edge_count()), -1);
  std::vector<int> root_to_comp(static_cast<std::size_t>(g.edge_count()), -1);
  const int h_count = (n - 1) * n;
  for (int e = 0; e < g.edge_count(); ++e) {
    if (!used[e]) continue;
    const int r = sets.find(e);
    if (root_to_comp[r] < 0) {
      root_to_comp[r] = out.components++;
      out.representative.push_back(edge_crossing(g, e, level));
      out.crossings.push_back(0);
      out.touches_boundary.push_back(false);
    }
    const int c = root_to_comp[r];
    out.edge_component[e] = c;
    ++out.crossings[c];
    bool boundary;
    if (e < h_count) {
      const int j = e / (n - 1);
      boundary = (j == 0 || j == n - 1);
    } else {
      const int i = (e - h_count) % n;
      boundary = (i == 0 || i == n - 1);
    }
    if (boundary) out.touches_boundary[c] = true;
  }
  return out;
}

namespace {

double point_segment_distance2(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = norm2(ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm2(p - (a + t * ab));
}

}  // namespace

std::optional<int> component_near(const ScalarGrid& g, const LevelCensus& census, Vec2 p,
                                  int radius) {
  const auto [ci, cj] = g.cell_of(p);
  double best = std::numeric_limits<double>::infinity();
  std::optional<int> best_comp;
  std::array<std::pair<int, int>, 2> segs;
  for (int r = 0; r <= radius; ++r) {
    for (int j = cj - r; j <= cj + r; ++j) {
      for (int i = ci - r; i <= ci + r; ++i) {
        if (std::max(std::abs(i - ci), std::abs(j - cj)) != r) continue;
        if (i < 0 || j < 0 || i + 1 >= g.n() || j + 1 >= g.n()) continue;
        const int ns = cell_segments(g, i, j, census.level, segs);
        const CellEdges ce = cell_edges(g, i, j);
        for (int s = 0; s < ns; ++s) {
          const int ea = ce.edge[segs[s].first];
          const int eb = ce.edge[segs[s].second];
          const Vec2 a = edge_crossing(g, ea, census.level);
          const Vec2 b = edge_crossing(g, eb, census.level);
          const double d2 = point_segment_distance2(p, a, b);
          if (d2 < best) {
            best = d2;
            best_comp = census.edge_component[ea];
          }
        }
      }
    }
    // a hit in ring r beats anything in further rings unless it is farther
    // than one cell diagonal away
    if (best_comp && std::sqrt(best) < r * std::min(g.dx(), g.dy())) break;
  }
  return best_comp;
}

}  // namespace reebldp
