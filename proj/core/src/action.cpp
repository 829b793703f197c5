#include "reebldp/action.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <sstream>

#include "reebldp/errors.hpp"

namespace reebldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double vertex_h(const ReebGraph& g, int v) { return g.vertex(v).critical.h_value; }

GraphPoint make_point(const ReebGraph& g, int edge, double h) {
  GraphPoint p{edge, h, std::nullopt};
  p.at_vertex = g.vertex_at(edge, h);
  return p;
}

}  // namespace

bool ActionValue::finite() const noexcept { return std::isfinite(value); }

// ---------------------------------------------------------------- evaluation

ActionValue evaluate_action(const CoefficientTables& tables, const ReebGraph& graph, const GraphPath& path,
                            const ActionOptions& opt) {
  ActionValue out;
  if (path.size() < 2) return out;
  out.breakdown.reserve(path.size() - 1);
  struct Leg {
    int edge;
    double from, to;
  };
  for (std::size_t m = 0; m + 1 < path.size(); ++m) {
    const GraphPoint& p = path.samples[m];
    const GraphPoint& q = path.samples[m + 1];
    const double dt = path.times[m + 1] - path.times[m];
    std::array<Leg, 2> legs{};
    int n_legs = 0;
    if (p.edge_id == q.edge_id) {
      legs[n_legs++] = {p.edge_id, p.h, q.h};
    } else {
      const auto v = graph.common_vertex(p.edge_id, q.edge_id);
      if (!v) {
        std::ostringstream os;
        os << "path jumps between non-adjacent edges " << p.edge_id << " and " << q.edge_id << " at t="
           << path.times[m];
        throw Error(ErrorCode::ContinuityBreak, os.str());
      }
      const double hv = vertex_h(graph, *v);
      legs[n_legs++] = {p.edge_id, p.h, hv};
      legs[n_legs++] = {q.edge_id, hv, q.h};
      ++out.vertex_crossings;
    }
    double dist = 0.0;
    for (int k = 0; k < n_legs; ++k) dist += std::abs(legs[k].to - legs[k].from);
    double cost = 0.0;
    if (dist == 0.0) {
      if (graph.vertex_at(p.edge_id, p.h)) out.vertex_dwell += dt;
    } else {
      double integral = 0.0;
      for (int k = 0; k < n_legs; ++k) {
        if (legs[k].to == legs[k].from) continue;
        const EdgeCoefficientTable& tab = tables.table(legs[k].edge);
        const double mid = 0.5 * (legs[k].from + legs[k].to);
        if (tab.b2(mid) <= opt.b2_floor) {
          integral = kInf;
          break;
        }
        integral += tab.inv_b2_integral(legs[k].from, legs[k].to);
      }
      cost = 0.5 * (dist / dt) * integral;
    }
    out.breakdown.push_back(cost);
    out.value += cost;
  }
  return out;
}

// ---------------------------------------------------------------- F metric

FMetric::FMetric(const CoefficientTables& tables, const ReebGraph& graph) : tables_(&tables), graph_(&graph) {
  const std::size_t ne = graph.edges().size(), nv = graph.vertices().size();
  lengths_.assign(ne, 0.0);
  for (const auto& e : graph.edges()) lengths_[static_cast<std::size_t>(e.id)] = tables.table(e.id).f_max();
  vdist_.assign(nv, std::vector<double>(nv, kInf));
  for (std::size_t v = 0; v < nv; ++v) vdist_[v][v] = 0.0;
  for (const auto& e : graph.edges()) {
    if (e.unbounded) continue;
    const auto a = static_cast<std::size_t>(e.v_lo), b = static_cast<std::size_t>(e.v_hi);
    const double w = lengths_[static_cast<std::size_t>(e.id)];
    vdist_[a][b] = std::min(vdist_[a][b], w);
    vdist_[b][a] = vdist_[a][b];
  }
  for (std::size_t k = 0; k < nv; ++k)
    for (std::size_t i = 0; i < nv; ++i)
      for (std::size_t j = 0; j < nv; ++j)
        if (vdist_[i][k] + vdist_[k][j] < vdist_[i][j]) vdist_[i][j] = vdist_[i][k] + vdist_[k][j];
}

double FMetric::f(const GraphPoint& p) const { return tables_->table(p.edge_id).f_metric(p.h); }

double FMetric::distance(const GraphPoint& a, const GraphPoint& b) const {
  const double fa = f(a), fb = f(b);
  if (a.edge_id == b.edge_id) return std::abs(fa - fb);
  const ReebEdge& ea = graph_->edge(a.edge_id);
  const ReebEdge& eb = graph_->edge(b.edge_id);
  const double la = edge_length(a.edge_id), lb = edge_length(b.edge_id);
  std::vector<std::pair<int, double>> ends_a{{ea.v_lo, fa}}, ends_b{{eb.v_lo, fb}};
  if (!ea.unbounded) ends_a.emplace_back(ea.v_hi, la - fa);
  if (!eb.unbounded) ends_b.emplace_back(eb.v_hi, lb - fb);
  double best = kInf;
  for (auto [va, da] : ends_a)
    for (auto [vb, db] : ends_b)
      best = std::min(best, da + vdist_[static_cast<std::size_t>(va)][static_cast<std::size_t>(vb)] + db);
  return best;
}

// ---------------------------------------------------------------- routes

std::vector<RouteLeg> graph_route(const CoefficientTables& tables, const ReebGraph& graph, const GraphPoint& a,
                                  const GraphPoint& b) {
  auto leg = [&](int e, double from, double to) {
    const EdgeCoefficientTable& t = tables.table(e);
    return RouteLeg{e, from, to, std::abs(t.f_metric(to) - t.f_metric(from))};
  };
  if (a.edge_id == b.edge_id) return {leg(a.edge_id, a.h, b.h)};
  // breadth-first search over edges, stepping through shared vertices
  const std::size_t ne = graph.edges().size();
  std::vector<int> parent(ne, -2), via(ne, -1);
  std::queue<int> q;
  parent[static_cast<std::size_t>(a.edge_id)] = -1;
  q.push(a.edge_id);
  while (!q.empty()) {
    const int e = q.front();
    q.pop();
    if (e == b.edge_id) break;
    const ReebEdge& ed = graph.edge(e);
    for (int v : {ed.v_lo, ed.v_hi}) {
      if (v < 0) continue;
      for (int n : graph.vertex(v).edges) {
        if (parent[static_cast<std::size_t>(n)] != -2) continue;
        parent[static_cast<std::size_t>(n)] = e;
        via[static_cast<std::size_t>(n)] = v;
        q.push(n);
      }
    }
  }
  if (parent[static_cast<std::size_t>(b.edge_id)] == -2)
    throw Error(ErrorCode::Unreachable, "no route between the two graph points");
  std::vector<std::pair<int, int>> chain;  // (edge, vertex entered through)
  for (int e = b.edge_id; e != a.edge_id; e = parent[static_cast<std::size_t>(e)])
    chain.emplace_back(e, via[static_cast<std::size_t>(e)]);
  std::reverse(chain.begin(), chain.end());
  std::vector<RouteLeg> route;
  double h = a.h;
  int edge = a.edge_id;
  for (auto [e, v] : chain) {
    const double hv = vertex_h(graph, v);
    route.push_back(leg(edge, h, hv));
    edge = e;
    h = hv;
  }
  route.push_back(leg(edge, h, b.h));
  return route;
}

GraphPath constant_speed_path(const CoefficientTables& tables, const ReebGraph& graph,
                              const std::vector<RouteLeg>& route, double horizon, int n) {
  if (route.empty() || n < 1) throw Error(ErrorCode::InvalidArgument, "empty route or grid");
  GraphPath p;
  double total = 0.0;
  for (const auto& l : route) total += l.f_length;
  std::vector<double> cum{0.0};
  for (const auto& l : route) cum.push_back(cum.back() + l.f_length);
  for (int k = 0; k <= n; ++k) {
    const double t = horizon * k / n;
    p.times.push_back(t);
    if (k == 0) {
      p.samples.push_back(make_point(graph, route.front().edge_id, route.front().h_from));
      continue;
    }
    if (k == n) {
      p.samples.push_back(make_point(graph, route.back().edge_id, route.back().h_to));
      continue;
    }
    const double s = total * k / n;
    std::size_t i = 0;
    while (i + 1 < route.size() && s > cum[i + 1]) ++i;
    const RouteLeg& l = route[i];
    const EdgeCoefficientTable& tab = tables.table(l.edge_id);
    const double f_from = tab.f_metric(l.h_from);
    const double dir = l.h_to >= l.h_from ? 1.0 : -1.0;
    const double local = std::min(s - cum[i], l.f_length);
    double h;
    if (local >= l.f_length) h = l.h_to;
    else if (local <= 0.0) h = l.h_from;
    else h = tab.h_of_f(f_from + dir * local);
    p.samples.push_back(make_point(graph, l.edge_id, h));
  }
  return p;
}

// ---------------------------------------------------------------- minimization

namespace {

struct Node {
  int edge = 0;
  double f = 0.0;
  double h = 0.0;
  int vertex = -1;
  GraphPoint point() const {
    GraphPoint p{edge, h, std::nullopt};
    if (vertex >= 0) p.at_vertex = vertex;
    return p;
  }
};

struct DpOutcome {
  double value = kInf;
  GraphPath path;
  GraphPoint end;
  std::size_t nodes = 0;
};

DpOutcome run_dp(const CoefficientTables& tables, const ReebGraph& graph, const FMetric& fm, const GraphPoint& y0,
                 const GraphPoint& y_end, double horizon, const MinimizeOptions& opt) {
  const double d0 = fm.distance(y0, y_end);
  const double len0 = fm.edge_length(y0.edge_id);
  const double delta = d0 > 0.0 ? d0 / opt.n_h : len0 / opt.n_h;
  const int window = 2 * ((opt.n_h + opt.n_time - 1) / opt.n_time) + 2;
  const double reach = 2.0 * d0 + 2.0 * window * delta;
  const double dt = horizon / opt.n_time;

  std::vector<Node> nodes;
  std::vector<std::vector<std::size_t>> by_edge(graph.edges().size());
  // vertex nodes first
  std::vector<std::size_t> vertex_node(graph.vertices().size(), SIZE_MAX);
  for (const auto& v : graph.vertices()) {
    const int e = v.edges.front();
    const ReebEdge& ed = graph.edge(e);
    Node nd{e, ed.v_lo == v.id ? 0.0 : fm.edge_length(e), v.critical.h_value, v.id};
    if (fm.distance(y0, nd.point()) > reach) continue;
    vertex_node[static_cast<std::size_t>(v.id)] = nodes.size();
    for (int inc : v.edges) by_edge[static_cast<std::size_t>(inc)].push_back(nodes.size());
    nodes.push_back(nd);
  }
  for (const auto& e : graph.edges()) {
    const EdgeCoefficientTable& tab = tables.table(e.id);
    const double len = fm.edge_length(e.id);
    double anchor = 0.0;
    if (e.id == y0.edge_id) anchor = fm.f(y0);
    else if (e.id == y_end.edge_id) anchor = fm.f(y_end);
    const auto k_lo = static_cast<long long>(std::ceil((0.0 - anchor) / delta - 1e-9));
    const auto k_hi = static_cast<long long>(std::floor((len - anchor) / delta + 1e-9));
    if (k_hi - k_lo > 5'000'000) throw Error(ErrorCode::InvalidArgument, "DP lattice too large");
    for (long long k = k_lo; k <= k_hi; ++k) {
      const double f = std::clamp(anchor + static_cast<double>(k) * delta, 0.0, len);
      const double tol = 1e-12 * std::max(1.0, len);
      if (f <= tol && vertex_node[static_cast<std::size_t>(e.v_lo)] != SIZE_MAX) continue;
      if (!e.unbounded && f >= len - tol && vertex_node[static_cast<std::size_t>(e.v_hi)] != SIZE_MAX) continue;
      if (f <= tol || (!e.unbounded && f >= len - tol)) continue;  // vertex outside the reach
      Node nd{e.id, f, 0.0, -1};
      // distance from y0 without the h lookup
      const double dy = e.id == y0.edge_id ? std::abs(f - fm.f(y0)) : 0.0;
      if (e.id == y0.edge_id && dy > reach) continue;
      nd.h = tab.h_of_f(f);
      if (e.id != y0.edge_id && fm.distance(y0, nd.point()) > reach) continue;
      by_edge[static_cast<std::size_t>(e.id)].push_back(nodes.size());
      nodes.push_back(nd);
    }
  }
  const std::size_t n = nodes.size();
  // order: lattice by (edge, f); keeps the tie-break on the lowest edge id
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (nodes[a].edge != nodes[b].edge) return nodes[a].edge < nodes[b].edge;
    return nodes[a].f < nodes[b].f;
  });
  std::vector<Node> sorted(n);
  std::vector<std::size_t> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    sorted[i] = nodes[order[i]];
    rank[order[i]] = i;
  }
  nodes.swap(sorted);
  for (auto& list : by_edge) {
    for (auto& idx : list) idx = rank[idx];
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) { return nodes[a].f < nodes[b].f; });
  }

  // neighbours within the window
  const double wlen = window * delta * (1.0 + 1e-9);
  std::vector<std::vector<std::pair<std::uint32_t, double>>> nbr(n);
  for (std::size_t i = 0; i < n; ++i) {
    const GraphPoint pi = nodes[i].point();
    std::set<int> edges{nodes[i].edge};
    if (nodes[i].vertex >= 0)
      for (int e : graph.vertex(nodes[i].vertex).edges) edges.insert(e);
    const ReebEdge& ei = graph.edge(nodes[i].edge);
    for (int v : {ei.v_lo, ei.v_hi})
      if (v >= 0)
        for (int e : graph.vertex(v).edges) edges.insert(e);
    std::set<std::size_t> seen;
    for (int e : edges)
      for (std::size_t j : by_edge[static_cast<std::size_t>(e)]) {
        if (seen.count(j)) continue;
        const double d = fm.distance(pi, nodes[j].point());
        if (d <= wlen) {
          seen.insert(j);
          nbr[j].emplace_back(static_cast<std::uint32_t>(i), 0.5 * d * d / dt);
        }
      }
  }
  for (auto& l : nbr) std::sort(l.begin(), l.end());

  auto locate = [&](const GraphPoint& p) {
    std::size_t best = SIZE_MAX;
    double bd = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = fm.distance(p, nodes[i].point());
      if (d < bd) {
        bd = d;
        best = i;
      }
    }
    if (best == SIZE_MAX || bd > 1e-9 * std::max(1.0, d0)) throw Error(ErrorCode::Unreachable, "endpoint not on the DP lattice");
    return best;
  };
  const std::size_t start = locate(y0);

  std::vector<GraphPoint> ref;
  if (opt.tube) {
    if (std::abs(opt.tube->reference.horizon() - horizon) > 1e-12 * horizon)
      throw Error(ErrorCode::GridMismatch, "tube reference horizon differs from the minimization horizon");
    for (int k = 0; k <= opt.n_time; ++k) ref.push_back(sample_path(graph, opt.tube->reference, horizon * k / opt.n_time));
  }
  auto allowed = [&](int k, std::size_t j) {
    if (!opt.tube) return true;
    return graph.distance(nodes[j].point(), ref[static_cast<std::size_t>(k)]) <= opt.tube->delta * (1.0 + 1e-12);
  };

  std::vector<double> cur(n, kInf), next(n, kInf);
  std::vector<std::uint32_t> pred(static_cast<std::size_t>(opt.n_time) * n, UINT32_MAX);
  if (!allowed(0, start)) throw Error(ErrorCode::Unreachable, "start point outside the tube");
  cur[start] = 0.0;
  for (int k = 0; k < opt.n_time; ++k) {
    std::uint32_t* pk = pred.data() + static_cast<std::size_t>(k) * n;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] = kInf;
      if (!allowed(k + 1, j)) continue;
      for (auto [i, c] : nbr[j]) {
        const double v = cur[i] + c;
        if (v < next[j]) {
          next[j] = v;
          pk[j] = i;
        }
      }
    }
    cur.swap(next);
  }
  std::size_t end = SIZE_MAX;
  if (opt.free_end) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j)
      if (cur[j] < best) {
        best = cur[j];
        end = j;
      }
  } else {
    end = locate(y_end);
  }
  DpOutcome out;
  out.nodes = n;
  if (end == SIZE_MAX || !std::isfinite(cur[end])) return out;
  out.value = cur[end];
  std::vector<std::size_t> seq(static_cast<std::size_t>(opt.n_time) + 1);
  seq.back() = end;
  for (int k = opt.n_time - 1; k >= 0; --k)
    seq[static_cast<std::size_t>(k)] = pred[static_cast<std::size_t>(k) * n + seq[static_cast<std::size_t>(k) + 1]];
  for (int k = 0; k <= opt.n_time; ++k) {
    out.path.times.push_back(horizon * k / opt.n_time);
    out.path.samples.push_back(nodes[seq[static_cast<std::size_t>(k)]].point());
  }
  out.end = out.path.samples.back();
  if (!opt.free_end) out.end = y_end;
  return out;
}

}  // namespace

MinActionResult minimize_action(const CoefficientTables& tables, const ReebGraph& graph, const GraphPoint& y0,
                                const GraphPoint& y1, double horizon, const MinimizeOptions& opt) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (opt.n_time < 1 || opt.n_h < 1) throw Error(ErrorCode::InvalidArgument, "grid sizes must be positive");
  const FMetric fm(tables, graph);
  MinActionResult res;
  res.dp_value = std::numeric_limits<double>::quiet_NaN();

  auto finish = [&](const std::vector<RouteLeg>& route) {
    double d = 0.0;
    for (const auto& l : route) d += l.f_length;
    res.route = route;
    res.shooting_value = d * d / (2.0 * horizon);
    res.path = constant_speed_path(tables, graph, route, horizon, opt.n_time);
    res.s = res.shooting_value;
    res.lagrange_energy = d * d / (2.0 * horizon * horizon);
    res.method = "shooting";
  };

  const GraphPoint target = opt.free_end && opt.tube ? opt.tube->reference.samples.back() : y1;
  const double d0 = fm.distance(y0, target);
  if (!std::isfinite(d0)) {
    std::ostringstream os;
    os << "every route from edge " << y0.edge_id << " to edge " << target.edge_id
       << " passes a span where B^2 vanishes identically";
    throw Error(ErrorCode::Unreachable, os.str());
  }

  if (!opt.run_dp || (!opt.tube && d0 == 0.0)) {
    if (opt.tube) throw Error(ErrorCode::InvalidArgument, "tube constraints need the DP stage");
    finish(graph_route(tables, graph, y0, y1));
    res.action = evaluate_action(tables, graph, res.path);
    return res;
  }

  const DpOutcome dp = run_dp(tables, graph, fm, y0, target, horizon, opt);
  res.dp_nodes = dp.nodes;
  if (!std::isfinite(dp.value)) throw Error(ErrorCode::Unreachable, "no admissible path on the DP lattice");
  res.dp_value = dp.value;
  finish(graph_route(tables, graph, y0, dp.end));
  bool inside = true;
  if (opt.tube) {
    for (std::size_t k = 0; k < res.path.size() && inside; ++k) {
      const GraphPoint r = sample_path(graph, opt.tube->reference, res.path.times[k]);
      inside = graph.distance(res.path.samples[k], r) <= opt.tube->delta * (1.0 + 1e-9);
    }
  }
  if (!inside || res.shooting_value > dp.value * (1.0 + 1e-9)) {
    res.path = dp.path;
    res.s = dp.value;
    res.lagrange_energy = dp.value / horizon;
    res.method = "dp";
  }
  res.action = evaluate_action(tables, graph, res.path);
  return res;
}

// ---------------------------------------------------------------- zero speed

namespace {

bool at_exterior_vertex(const ReebGraph& graph, const GraphPoint& p) {
  const auto v = p.at_vertex ? p.at_vertex : graph.vertex_at(p.edge_id, p.h);
  return v && !graph.vertex(*v).interior;
}

void fit_exponent(ZeroSpeedReport& r) {
  const std::size_t n = r.dts.size();
  if (n < 2) return;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  bool positive = true;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(r.quotients[k] > 0.0)) positive = false;
    const double x = std::log(r.dts[k]), y = std::log(std::max(r.quotients[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double dn = static_cast<double>(n);
  r.exponent = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  // refinements listed from coarse to fine
  bool decreasing = true;
  for (std::size_t k = 1; k < n; ++k)
    if (!(r.quotients[k] < r.quotients[k - 1])) decreasing = false;
  r.satisfied = positive && decreasing && r.exponent > 0.0;
  if (!r.satisfied) r.note = "departure speed does not vanish under refinement";
}

}  // namespace

ZeroSpeedReport zero_speed_report(const ReebGraph& graph, const std::vector<GraphPath>& refinements) {
  ZeroSpeedReport r;
  if (refinements.empty() || refinements.front().size() < 2) {
    r.note = "skipped: no paths";
    return r;
  }
  if (!at_exterior_vertex(graph, refinements.front().samples.front())) {
    r.note = "skipped: start is not an exterior vertex";
    return r;
  }
  r.applicable = true;
  for (const auto& p : refinements) {
    const double dt = p.times[1] - p.times[0];
    r.dts.push_back(dt);
    r.quotients.push_back(std::abs(p.samples[1].h - p.samples[0].h) / dt);
  }
  fit_exponent(r);
  return r;
}

ZeroSpeedReport zero_speed_at_exterior_vertex_check(const CoefficientTables& tables, const ReebGraph& graph,
                                                    const GraphPoint& y0, const GraphPoint& y1, double horizon,
                                                    const std::vector<int>& n_times) {
  if (!at_exterior_vertex(graph, y0)) {
    ZeroSpeedReport r;
    r.note = "skipped: start is not an exterior vertex";
    return r;
  }
  std::vector<GraphPath> paths;
  for (int n : n_times) {
    MinimizeOptions opt;
    opt.n_time = n;
    opt.run_dp = false;
    paths.push_back(minimize_action(tables, graph, y0, y1, horizon, opt).path);
  }
  return zero_speed_report(graph, paths);
}

}  // namespace reebldp
