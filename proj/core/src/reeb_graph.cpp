#include "reebldp/reeb_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "reebldp/errors.hpp"
#include "reebldp/ode.hpp"

namespace reebldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_level(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

struct EdgeNodes {
  int i0, j0, i1, j1;
};

EdgeNodes edge_nodes(int n, int e) {
  const int h_count = (n - 1) * n;
  if (e < h_count) {
    const int j = e / (n - 1), i = e % (n - 1);
    return {i, j, i + 1, j};
  }
  const int r = e - h_count;
  const int j = r / n, i = r % n;
  return {i, j, i, j + 1};
}

double boundary_minimum(const HamiltonianSystem& sys, const Box& box, int n) {
  double m = kInf;
  const int k = 4 * n;
  for (int s = 0; s <= k; ++s) {
    const double tx = box.xmin + box.width() * s / k;
    const double ty = box.ymin + box.height() * s / k;
    m = std::min({m, sys.h({tx, box.ymin}), sys.h({tx, box.ymax}), sys.h({box.xmin, ty}),
                  sys.h({box.xmax, ty})});
  }
  return m;
}

[[noreturn]] void wiring_error(const std::string& what) {
  throw Error(ErrorCode::AmbiguousWiring, what);
}

}  // namespace

// ---------------------------------------------------------------- gradient walk

Vec2 gradient_walk(const HamiltonianSystem& sys, Vec2 x, double target) {
  const double h0 = sys.h(x);
  if (h0 == target) return x;
  auto rhs = [&sys](double, const ode::State<2>& y) {
    const Vec2 g = sys.grad({y[0], y[1]});
    const double g2 = norm2(g);
    if (!(g2 > 1e-300)) throw Error(ErrorCode::NonConvergence, "gradient walk reached a critical point");
    return ode::State<2>{g.x / g2, g.y / g2};
  };
  ode::Options opt;
  opt.rtol = 1e-9;
  opt.atol = 1e-12;
  opt.h_init = (target - h0) / 16.0;
  opt.max_steps = 100000;
  const auto res = ode::integrate<2>(rhs, h0, {x.x, x.y}, target, opt,
                                     [](double, const auto&, double, const auto&) { return true; });
  if (res.status != ode::Status::Completed) {
    throw Error(ErrorCode::NonConvergence, "gradient walk did not reach the target level");
  }
  Vec2 p{res.y[0], res.y[1]};
  for (int it = 0; it < 3; ++it) {
    const Vec2 g = sys.grad(p);
    const double g2 = norm2(g);
    if (!(g2 > 0.0)) break;
    p += ((target - sys.h(p)) / g2) * g;
  }
  return p;
}

// ---------------------------------------------------------------- build

ReebGraph::ReebGraph(const HamiltonianSystem& sys, const Box& box, int grid_n)
    : box_(box), grid_(box, grid_n, [h = sys.hamiltonian()](Vec2 p) { return h(p); }) {}

ReebGraph ReebGraph::build(const HamiltonianSystem& sys, const ReebBuildOptions& opt) {
  return build(sys, find_critical_points(sys, sys.box()), sys.box(), opt);
}

ReebGraph ReebGraph::build(const HamiltonianSystem& sys, const std::vector<CriticalPoint>& critical,
                           const Box& box, const ReebBuildOptions& opt) {
  if (critical.empty()) wiring_error("no critical points");
  std::vector<CriticalPoint> cps = critical;
  std::sort(cps.begin(), cps.end(), [](const CriticalPoint& p, const CriticalPoint& q) {
    if (p.h_value != q.h_value) return p.h_value < q.h_value;
    if (p.location.x != q.location.x) return p.location.x < q.location.x;
    return p.location.y < q.location.y;
  });
  for (std::size_t a = 0; a < cps.size(); ++a) {
    for (std::size_t b = a + 1; b < cps.size(); ++b) {
      const bool saddle = cps[a].kind == CriticalKind::Saddle || cps[b].kind == CriticalKind::Saddle;
      if (saddle && same_level(cps[a].h_value, cps[b].h_value)) {
        std::ostringstream os;
        os << "critical points share the saddle level " << cps[a].h_value;
        throw Error(ErrorCode::EqualSaddleLevels, os.str());
      }
    }
  }

  ReebGraph g(sys, box, opt.grid_n);
  const int n = opt.grid_n;
  g.h_max_ = boundary_minimum(sys, box, n);
  for (const auto& cp : cps) {
    if (!box.contains(cp.location)) wiring_error("critical point outside the working box");
    if (cp.h_value >= g.h_max_) wiring_error("critical level at or above the box truncation H_max");
  }

  // distinct levels and their critical points
  std::vector<std::vector<int>> at_level;
  for (int c = 0; c < static_cast<int>(cps.size()); ++c) {
    if (g.levels_.empty() || !same_level(g.levels_.back(), cps[c].h_value)) {
      g.levels_.push_back(cps[c].h_value);
      at_level.emplace_back();
    }
    at_level.back().push_back(c);
  }
  const int m = static_cast<int>(g.levels_.size());
  for (int k = 0; k < m; ++k) {
    const double up = (k + 1 < m) ? g.levels_[k + 1] : g.h_max_;
    g.probes_.push_back(0.5 * (g.levels_[k] + up));
  }
  for (int k = 0; k < m; ++k) {
    g.census_.push_back(level_census(g.grid_, g.probes_[k]));
    const auto& c = g.census_.back();
    if (c.components == 0) wiring_error("empty level set at a probe level");
    for (bool tb : c.touches_boundary)
      if (tb) wiring_error("level-set component reaches the box boundary below H_max");
  }
  std::vector<int> offset(m + 1, 0);
  for (int k = 0; k < m; ++k) offset[k + 1] = offset[k] + g.census_[k].components;
  const int total_comps = offset[m];
  DisjointSets chains(static_cast<std::size_t>(total_comps));
  std::vector<int> comp_v_lo(total_comps, -1), comp_v_hi(total_comps, -1);

  const std::size_t nn = static_cast<std::size_t>(n) * n;
  for (int k = 0; k < m; ++k) {
    const double lower = k > 0 ? g.probes_[k - 1] : -kInf;
    const double upper = g.probes_[k];
    const LevelCensus* cl = k > 0 ? &g.census_[k - 1] : nullptr;
    const LevelCensus& cu = g.census_[k];
    const int nl = cl ? cl->components : 0;
    const int nu = cu.components;
    const int nc = static_cast<int>(at_level[k].size());
    const std::size_t base_l = nn, base_u = nn + nl, base_c = nn + nl + nu;
    DisjointSets uf(nn + nl + nu + nc);
    auto in_slab = [&](int i, int j) {
      const double v = g.grid_.value(i, j);
      return v > lower && v < upper;
    };
    auto node = [n](int i, int j) { return static_cast<int>(static_cast<std::size_t>(j) * n + i); };
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        if (!in_slab(i, j)) continue;
        if (i + 1 < n && in_slab(i + 1, j)) uf.unite(node(i, j), node(i + 1, j));
        if (j + 1 < n && in_slab(i, j + 1)) uf.unite(node(i, j), node(i, j + 1));
      }
    }
    // diagonal connections through ambiguous cells
    for (int j = 0; j + 1 < n; ++j) {
      for (int i = 0; i + 1 < n; ++i) {
        const bool s0 = in_slab(i, j), s1 = in_slab(i + 1, j), s2 = in_slab(i + 1, j + 1),
                   s3 = in_slab(i, j + 1);
        const bool diag = (s0 && s2 && !s1 && !s3) || (s1 && s3 && !s0 && !s2);
        if (!diag) continue;
        const double vc = g.grid_.field(g.grid_.node(i, j) + Vec2{0.5 * g.grid_.dx(), 0.5 * g.grid_.dy()});
        if (!(vc > lower && vc < upper)) continue;
        if (s0) uf.unite(node(i, j), node(i + 1, j + 1));
        else uf.unite(node(i + 1, j), node(i, j + 1));
      }
    }
    if (cl) {
      for (int e = 0; e < g.grid_.edge_count(); ++e) {
        const int comp = cl->edge_component[e];
        if (comp < 0) continue;
        const EdgeNodes en = edge_nodes(n, e);
        int ia = en.i0, ja = en.j0;
        if (!(g.grid_.value(ia, ja) > lower)) { ia = en.i1; ja = en.j1; }
        if (in_slab(ia, ja)) {
          uf.unite(static_cast<int>(base_l + comp), node(ia, ja));
        } else if (cu.edge_component[e] >= 0) {
          uf.unite(static_cast<int>(base_l + comp), static_cast<int>(base_u + cu.edge_component[e]));
        }
      }
    }
    for (int e = 0; e < g.grid_.edge_count(); ++e) {
      const int comp = cu.edge_component[e];
      if (comp < 0) continue;
      const EdgeNodes en = edge_nodes(n, e);
      int ib = en.i0, jb = en.j0;
      if (g.grid_.value(ib, jb) > upper) { ib = en.i1; jb = en.j1; }
      if (in_slab(ib, jb)) uf.unite(static_cast<int>(base_u + comp), node(ib, jb));
    }
    for (int q = 0; q < nc; ++q) {
      const CriticalPoint& cp = cps[at_level[k][q]];
      const auto [ci, cj] = g.grid_.cell_of(cp.location);
      bool hooked = false;
      for (int r = 0; r <= 2 && !hooked; ++r) {
        for (int j = cj - r; j <= cj + 1 + r; ++j) {
          for (int i = ci - r; i <= ci + 1 + r; ++i) {
            if (i < 0 || j < 0 || i >= n || j >= n || !in_slab(i, j)) continue;
            uf.unite(static_cast<int>(base_c + q), node(i, j));
            hooked = true;
          }
        }
      }
      if (!hooked) wiring_error("critical point not resolved by the grid");
    }

    struct ClassInfo {
      std::vector<int> lo, up, crit;
    };
    std::map<int, ClassInfo> classes;
    for (int c = 0; c < nl; ++c) classes[uf.find(static_cast<int>(base_l + c))].lo.push_back(c);
    for (int c = 0; c < nu; ++c) classes[uf.find(static_cast<int>(base_u + c))].up.push_back(c);
    for (int q = 0; q < nc; ++q) classes[uf.find(static_cast<int>(base_c + q))].crit.push_back(q);
    for (const auto& [root, info] : classes) {
      const int a = static_cast<int>(info.lo.size());
      const int b = static_cast<int>(info.up.size());
      std::ostringstream os;
      os << "inconsistent census near level " << g.levels_[k] << ": " << a << " below, " << b
         << " above, " << info.crit.size() << " critical points (grid too coarse?)";
      if (info.crit.empty()) {
        if (a != 1 || b != 1) wiring_error(os.str());
        chains.unite(offset[k - 1] + info.lo[0], offset[k] + info.up[0]);
        continue;
      }
      if (info.crit.size() != 1) wiring_error(os.str());
      const CriticalPoint& cp = cps[at_level[k][info.crit[0]]];
      bool ok = false;
      switch (cp.kind) {
        case CriticalKind::Minimum: ok = (a == 0 && b == 1); break;
        case CriticalKind::Maximum: ok = (a == 1 && b == 0); break;
        case CriticalKind::Saddle: ok = (a == 2 && b == 1) || (a == 1 && b == 2); break;
      }
      if (!ok) wiring_error(os.str());
      const int v = at_level[k][info.crit[0]];  // vertex ids follow the sorted critical points
      for (int c : info.lo) comp_v_hi[offset[k - 1] + c] = v;
      for (int c : info.up) comp_v_lo[offset[k] + c] = v;
    }
  }
  if (g.census_[m - 1].components != 1) wiring_error("more than one component above the top critical level");

  // collect chains into edges
  std::map<int, ReebEdge> by_root;
  for (int k = 0; k < m; ++k) {
    for (int c = 0; c < g.census_[k].components; ++c) {
      const int gc = offset[k] + c;
      ReebEdge& e = by_root[chains.find(gc)];
      if (comp_v_lo[gc] >= 0) e.v_lo = comp_v_lo[gc];
      if (comp_v_hi[gc] >= 0) e.v_hi = comp_v_hi[gc];
      e.anchors.push_back({k, g.probes_[k], g.census_[k].representative[c]});
      if (k == m - 1) e.unbounded = true;
    }
  }
  std::vector<ReebEdge> edges;
  for (auto& [root, e] : by_root) {
    if (e.v_lo < 0) wiring_error("edge without a lower vertex");
    if (!e.unbounded && e.v_hi < 0) wiring_error("bounded edge without an upper vertex");
    e.h_lo = cps[e.v_lo].h_value;
    e.h_hi = e.unbounded ? g.h_max_ : cps[e.v_hi].h_value;
    edges.push_back(std::move(e));
  }
  std::vector<int> order(edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int p, int q) {
    const ReebEdge& a = edges[p];
    const ReebEdge& b = edges[q];
    if (a.h_lo != b.h_lo) return a.h_lo < b.h_lo;
    if (a.h_hi != b.h_hi) return a.h_hi < b.h_hi;
    return a.v_lo < b.v_lo;
  });
  std::map<int, int> root_to_id;
  {
    std::vector<int> roots;
    for (const auto& [root, e] : by_root) roots.push_back(root);
    for (int id = 0; id < static_cast<int>(order.size()); ++id) root_to_id[roots[order[id]]] = id;
  }
  for (int id = 0; id < static_cast<int>(order.size()); ++id) {
    g.edges_.push_back(edges[order[id]]);
    g.edges_.back().id = id;
    if (g.edges_.back().unbounded) g.unbounded_edge_ = id;
  }
  g.probe_comp_edge_.resize(m);
  for (int k = 0; k < m; ++k) {
    g.probe_comp_edge_[k].resize(g.census_[k].components);
    for (int c = 0; c < g.census_[k].components; ++c)
      g.probe_comp_edge_[k][c] = root_to_id.at(chains.find(offset[k] + c));
  }

  for (int v = 0; v < static_cast<int>(cps.size()); ++v) {
    ReebVertex rv;
    rv.id = v;
    rv.critical = cps[v];
    rv.interior = cps[v].kind == CriticalKind::Saddle;
    g.vertices_.push_back(rv);
  }
  for (const auto& e : g.edges_) {
    g.vertices_[e.v_lo].edges.push_back(e.id);
    if (e.v_hi >= 0) g.vertices_[e.v_hi].edges.push_back(e.id);
  }
  for (auto& v : g.vertices_) {
    std::sort(v.edges.begin(), v.edges.end());
    const std::size_t want = v.interior ? 3 : 1;
    if (v.edges.size() != want) wiring_error("vertex degree does not match its kind");
  }

  const std::size_t nv = g.vertices_.size();
  g.vdist_.assign(nv, std::vector<double>(nv, kInf));
  for (std::size_t v = 0; v < nv; ++v) g.vdist_[v][v] = 0.0;
  for (const auto& e : g.edges_) {
    if (e.v_hi < 0) continue;
    const double w = std::abs(e.h_hi - e.h_lo);
    g.vdist_[e.v_lo][e.v_hi] = std::min(g.vdist_[e.v_lo][e.v_hi], w);
    g.vdist_[e.v_hi][e.v_lo] = g.vdist_[e.v_lo][e.v_hi];
  }
  for (std::size_t k = 0; k < nv; ++k)
    for (std::size_t i = 0; i < nv; ++i)
      for (std::size_t j = 0; j < nv; ++j)
        g.vdist_[i][j] = std::min(g.vdist_[i][j], g.vdist_[i][k] + g.vdist_[k][j]);
  return g;
}

// ---------------------------------------------------------------- queries

const ReebEdge& ReebGraph::edge(int id) const {
  if (id < 0 || id >= static_cast<int>(edges_.size()))
    throw Error(ErrorCode::InvalidArgument, "no edge " + std::to_string(id));
  return edges_[id];
}

const ReebVertex& ReebGraph::vertex(int id) const {
  if (id < 0 || id >= static_cast<int>(vertices_.size()))
    throw Error(ErrorCode::InvalidArgument, "no vertex " + std::to_string(id));
  return vertices_[id];
}

std::optional<int> ReebGraph::common_vertex(int e1, int e2) const {
  const ReebEdge& a = edge(e1);
  const ReebEdge& b = edge(e2);
  for (int va : {a.v_lo, a.v_hi}) {
    if (va < 0) continue;
    if (va == b.v_lo || va == b.v_hi) return va;
  }
  return std::nullopt;
}

bool ReebGraph::adjacent(int e1, int e2) const { return e1 == e2 || common_vertex(e1, e2).has_value(); }

std::optional<int> ReebGraph::vertex_at(int e, double h) const {
  const ReebEdge& ed = edge(e);
  if (same_level(ed.h_lo, h)) return ed.v_lo;
  if (ed.v_hi >= 0 && same_level(ed.h_hi, h)) return ed.v_hi;
  return std::nullopt;
}

GraphPoint ReebGraph::project(const HamiltonianSystem& sys, Vec2 x) const {
  if (!std::isfinite(x.x) || !std::isfinite(x.y) || !box_.contains(x)) {
    std::ostringstream os;
    os << "point (" << x.x << ", " << x.y << ") outside the working box";
    throw Error(ErrorCode::OutsideBox, os.str());
  }
  const double h = sys.h(x);
  for (std::size_t k = 0; k < levels_.size(); ++k) {
    if (h != levels_[k]) continue;
    // on a critical level: the nearest critical point at that level
    int best = -1;
    double bd = kInf;
    for (const auto& v : vertices_) {
      if (!same_level(v.critical.h_value, h)) continue;
      const double d = norm(v.critical.location - x);
      if (d < bd) { bd = d; best = v.id; }
    }
    return {vertices_[best].edges.front(), h, best};
  }
  if (h < levels_.front()) throw Error(ErrorCode::OutsideBox, "point below the lowest critical level");
  if (h > levels_.back()) return {unbounded_edge_, h, std::nullopt};
  const std::size_t j =
      static_cast<std::size_t>(std::upper_bound(levels_.begin(), levels_.end(), h) - levels_.begin()) - 1;
  const Vec2 p = gradient_walk(sys, x, probes_[j]);
  auto comp = component_near(grid_, census_[j], p, 4);
  if (!comp) comp = component_near(grid_, census_[j], p, 32);
  if (!comp) throw Error(ErrorCode::AmbiguousWiring, "projection could not locate a level-set component");
  return {probe_comp_edge_[j][*comp], h, std::nullopt};
}

Vec2 ReebGraph::seed_point(const HamiltonianSystem& sys, int e, double h) const {
  const ReebEdge& ed = edge(e);
  if (!(h > ed.h_lo) || (!ed.unbounded && !(h < ed.h_hi))) {
    throw Error(ErrorCode::OutOfSpan, "level outside the edge's open H-range");
  }
  const std::size_t j =
      static_cast<std::size_t>(std::upper_bound(levels_.begin(), levels_.end(), h) - levels_.begin()) - 1;
  for (const auto& a : ed.anchors)
    if (a.probe == static_cast<int>(j)) return gradient_walk(sys, a.point, h);
  throw Error(ErrorCode::AmbiguousWiring, "edge has no anchor in the slab of the requested level");
}

double ReebGraph::distance(const GraphPoint& a, const GraphPoint& b) const {
  auto ends = [this](const GraphPoint& p) {
    std::vector<std::pair<int, double>> out;  // (vertex, cost to reach it)
    if (p.at_vertex) {
      out.emplace_back(*p.at_vertex, 0.0);
      return out;
    }
    const ReebEdge& e = edge(p.edge_id);
    out.emplace_back(e.v_lo, std::abs(p.h - e.h_lo));
    if (e.v_hi >= 0) out.emplace_back(e.v_hi, std::abs(e.h_hi - p.h));
    return out;
  };
  if (!a.at_vertex && !b.at_vertex && a.edge_id == b.edge_id) return std::abs(a.h - b.h);
  if (a.at_vertex && b.at_vertex && *a.at_vertex == *b.at_vertex) return 0.0;
  double best = kInf;
  for (const auto& [va, ca] : ends(a))
    for (const auto& [vb, cb] : ends(b)) best = std::min(best, ca + vdist_[va][vb] + cb);
  return best;
}

nlohmann::json ReebGraph::to_json() const {
  nlohmann::json doc;
  doc["vertices"] = nlohmann::json::array();
  for (const auto& v : vertices_) {
    doc["vertices"].push_back({{"id", v.id},
                               {"x", v.critical.location.x},
                               {"y", v.critical.location.y},
                               {"h", v.critical.h_value},
                               {"kind", std::string(to_string(v.critical.kind))},
                               {"interior", v.interior}});
  }
  doc["edges"] = nlohmann::json::array();
  for (const auto& e : edges_) {
    nlohmann::json je = {{"id", e.id}, {"h_lo", e.h_lo}, {"h_hi", e.h_hi}, {"v_lo", e.v_lo}};
    je["v_hi"] = e.v_hi >= 0 ? nlohmann::json(e.v_hi) : nlohmann::json(nullptr);
    je["unbounded"] = e.unbounded;
    doc["edges"].push_back(je);
  }
  doc["h_max"] = h_max_;
  doc["grid_n"] = grid_.n();
  return doc;
}

// ---------------------------------------------------------------- paths

GraphPoint sample_path(const ReebGraph& g, const GraphPath& path, double t) {
  if (path.samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  const auto& ts = path.times;
  if (t <= ts.front()) return path.samples.front();
  if (t >= ts.back()) return path.samples.back();
  const std::size_t hi = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
  const std::size_t lo = hi - 1;
  if (ts[lo] == t) return path.samples[lo];
  const GraphPoint& a = path.samples[lo];
  const GraphPoint& b = path.samples[hi];
  const double w = (t - ts[lo]) / (ts[hi] - ts[lo]);
  const double h = a.h + w * (b.h - a.h);
  if (a.edge_id == b.edge_id) {
    return {a.edge_id, h, g.vertex_at(a.edge_id, h)};
  }
  const auto v = g.common_vertex(a.edge_id, b.edge_id);
  if (!v) return w < 0.5 ? a : b;
  const double hv = g.vertex(*v).critical.h_value;
  if (h == hv) return {a.edge_id, h, *v};
  const bool a_side = (a.h - hv) * (h - hv) > 0.0 || a.h == hv;
  return {a_side ? a.edge_id : b.edge_id, h, std::nullopt};
}

double path_distance(const ReebGraph& g, const GraphPath& p1, const GraphPath& p2) {
  if (p1.samples.empty() || p2.samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  const double t1 = p1.horizon(), t2 = p2.horizon();
  if (std::abs(t1 - t2) > 1e-12 * std::max(1.0, std::abs(t1)) || p1.times.front() != p2.times.front()) {
    throw Error(ErrorCode::GridMismatch, "paths have different horizons");
  }
  double sup = 0.0;
  if (p1.times == p2.times) {
    for (std::size_t k = 0; k < p1.size(); ++k) sup = std::max(sup, g.distance(p1.samples[k], p2.samples[k]));
    return sup;
  }
  std::vector<double> ts = p1.times;
  ts.insert(ts.end(), p2.times.begin(), p2.times.end());
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  for (double t : ts) sup = std::max(sup, g.distance(sample_path(g, p1, t), sample_path(g, p2, t)));
  return sup;
}

TrajectoryProjector::TrajectoryProjector(const HamiltonianSystem& sys, const ReebGraph& graph, int resync)
    : sys_(&sys), graph_(&graph), resync_(std::max(1, resync)) {}

GraphPoint TrajectoryProjector::push(Vec2 x) {
  GraphPoint out;
  bool full = !current_ || count_ % static_cast<std::size_t>(resync_) == 0;
  if (!full) {
    const ReebEdge& e = graph_->edge(current_->edge_id);
    const double h = sys_->h(x);
    if (!graph_->box().contains(x)) throw Error(ErrorCode::OutsideBox, "trajectory left the working box");
    if (h > e.h_lo && (e.unbounded || h < e.h_hi)) {
      out = {e.id, h, std::nullopt};
    } else {
      full = true;
    }
  }
  if (full) {
    out = graph_->project(*sys_, x);
    ++full_;
    if (current_ && !graph_->adjacent(current_->edge_id, out.edge_id)) {
      bool bridged = false;
      // a vertex point may be filed under another incident edge
      if (current_->at_vertex) {
        const auto& inc = graph_->vertex(*current_->at_vertex).edges;
        bridged = std::find(inc.begin(), inc.end(), out.edge_id) != inc.end();
      }
      if (!bridged) {
        std::ostringstream os;
        os << "jump from edge " << current_->edge_id << " to non-adjacent edge " << out.edge_id;
        throw Error(ErrorCode::ContinuityBreak, os.str());
      }
    }
  }
  current_ = out;
  ++count_;
  return out;
}

GraphPath project_trajectory(const HamiltonianSystem& sys, const ReebGraph& graph,
                             std::span<const Vec2> xs, std::span<const double> times, int resync) {
  if (xs.size() != times.size()) throw Error(ErrorCode::InvalidArgument, "points and times differ in length");
  TrajectoryProjector proj(sys, graph, resync);
  GraphPath path;
  path.times.assign(times.begin(), times.end());
  path.samples.reserve(xs.size());
  for (const Vec2& x : xs) path.samples.push_back(proj.push(x));
  return path;
}

}  // namespace reebldp
