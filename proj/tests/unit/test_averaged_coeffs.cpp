#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "reebldp/averaged_coeffs.hpp"
#include "reebldp/errors.hpp"

using namespace reebldp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const HamiltonianSystem& harmonic() {
  static const HamiltonianSystem sys = HamiltonianSystem::builtin("harmonic");
  return sys;
}
const ReebGraph& harmonic_graph() {
  static const ReebGraph g = ReebGraph::build(harmonic(), ReebBuildOptions{256});
  return g;
}
const HamiltonianSystem& dw() {
  static const HamiltonianSystem sys = HamiltonianSystem::builtin("doublewell");
  return sys;
}
const ReebGraph& dw_graph() {
  static const ReebGraph g = ReebGraph::build(dw(), ReebBuildOptions{256});
  return g;
}

int edge_of_min(const ReebGraph& g, double x) {
  for (const auto& v : g.vertices())
    if (v.critical.kind == CriticalKind::Minimum && std::abs(v.critical.location.x - x) < 1e-6) return v.edges.at(0);
  return -1;
}

bool inside(const std::vector<Vec2>& poly, Vec2 p) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

const EdgeCoefficientTable& dw_min_table() {
  static const EdgeCoefficientTable t = tabulate_edge(dw(), dw_graph(), edge_of_min(dw_graph(), 1.0));
  return t;
}

}  // namespace

TEST_CASE("trace: harmonic circle") {
  const LevelCurve c = trace_level_curve(harmonic(), harmonic_graph(), 0, 0.5);
  CHECK(c.length == doctest::Approx(kTwoPi).epsilon(1e-6));
  CHECK(c.max_residual <= 1e-9);
  for (const Vec2& p : c.points) CHECK(norm(p) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("trace: double-well loops by point-in-polygon") {
  const ReebGraph& g = dw_graph();
  const LevelCurve right = trace_level_curve(dw(), g, edge_of_min(g, 1.0), 0.1);
  CHECK(inside(right.points, {1, 0}));
  CHECK_FALSE(inside(right.points, {-1, 0}));
  CHECK_FALSE(inside(right.points, {0, 0}));
  const LevelCurve left = trace_level_curve(dw(), g, edge_of_min(g, -1.0), 0.1);
  CHECK(inside(left.points, {-1, 0}));
  CHECK_FALSE(inside(left.points, {1, 0}));
  const LevelCurve outer = trace_level_curve(dw(), g, g.unbounded_edge(), 0.5);
  CHECK(inside(outer.points, {-1, 0}));
  CHECK(inside(outer.points, {0, 0}));
  CHECK(inside(outer.points, {1, 0}));
  CHECK(outer.max_residual <= 1e-9);
}

TEST_CASE("trace: guard band") {
  const ReebGraph& g = dw_graph();
  CHECK_THROWS_WITH_AS(trace_level_curve(dw(), g, edge_of_min(g, 1.0), 0.25 - 1e-12), doctest::Contains("guard"),
                       Error);
  try {
    trace_level_curve(dw(), g, edge_of_min(g, 1.0), 1e-10);
    FAIL("expected GuardBand");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GuardBand);
  }
}

TEST_CASE("coeffs: harmonic closed forms") {
  for (double h : {0.1, 0.5, 2.0, 4.5}) {
    const Coeffs c = compute_coeffs(harmonic(), trace_level_curve(harmonic(), harmonic_graph(), 0, h));
    CHECK(c.t == doctest::Approx(kTwoPi).epsilon(1e-9));
    CHECK(c.b2 == doctest::Approx(2.0 * h).epsilon(1e-9));
  }
}

TEST_CASE("coeffs: zero diffusion") {
  const HamiltonianSystem sys = HamiltonianSystem::builtin("harmonic", Sigma::constant({{0, 0}, {0, 0}}));
  const Coeffs c = compute_coeffs(sys, trace_level_curve(sys, harmonic_graph(), 0, 0.7));
  CHECK(c.b2 == 0.0);
  CHECK(c.t == doctest::Approx(kTwoPi).epsilon(1e-9));
}

TEST_CASE("coeffs: arc-length vs flow-time quadrature") {
  const ReebGraph& g = dw_graph();
  const int e1 = edge_of_min(g, 1.0);
  const LevelCurve c = trace_level_curve(dw(), g, e1, 0.1);
  const Coeffs arc = compute_coeffs(dw(), c);
  const Coeffs flow = flow_time_coeffs(dw(), c.points.front());
  CHECK(arc.t == doctest::Approx(flow.t).epsilon(1e-5));
  CHECK(arc.b2 == doctest::Approx(flow.b2).epsilon(1e-5));

  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.edges().size()) - 1);
  for (int k = 0; k < 20; ++k) {
    const ReebEdge& e = g.edge(pick(rng));
    const double hi = e.unbounded ? 3.0 : e.h_hi;
    std::uniform_real_distribution<double> u(e.h_lo + 0.02 * (hi - e.h_lo), hi - 0.02 * (hi - e.h_lo));
    const double h = u(rng);
    const LevelCurve lc = trace_level_curve(dw(), g, e.id, h);
    const Coeffs a = compute_coeffs(dw(), lc);
    const Coeffs f = flow_time_coeffs(dw(), lc.points.front());
    CHECK(a.t == doctest::Approx(f.t).epsilon(1e-5));
    CHECK(a.b2 == doctest::Approx(f.b2).epsilon(1e-5));
  }
}

TEST_CASE("coeffs: grid convergence") {
  TraceOptions fine;
  fine.refine = 2.0;
  for (double h : {0.3, 3.0}) {
    const Coeffs a = compute_coeffs(harmonic(), trace_level_curve(harmonic(), harmonic_graph(), 0, h));
    const Coeffs b = compute_coeffs(harmonic(), trace_level_curve(harmonic(), harmonic_graph(), 0, h, fine));
    CHECK(std::abs(a.t - b.t) <= 1e-6 * b.t);
    CHECK(std::abs(a.b2 - b.b2) <= 1e-6 * b.b2);
  }
  const ReebGraph& g = dw_graph();
  for (auto [e, h] : {std::pair{edge_of_min(g, 1.0), 0.1}, std::pair{edge_of_min(g, -1.0), 0.249},
                      std::pair{g.unbounded_edge(), 0.2501}, std::pair{g.unbounded_edge(), 2.0}}) {
    const Coeffs a = compute_coeffs(dw(), trace_level_curve(dw(), g, e, h));
    const Coeffs b = compute_coeffs(dw(), trace_level_curve(dw(), g, e, h, fine));
    CHECK(std::abs(a.t - b.t) <= 1e-4 * b.t);
    CHECK(std::abs(a.b2 - b.b2) <= 1e-4 * b.b2);
  }
}

TEST_CASE("table: harmonic") {
  const EdgeCoefficientTable t = tabulate_edge(harmonic(), harmonic_graph(), 0);
  REQUIRE(t.h_grid.size() == t.t_values.size());
  double dev_t = 0.0, dev_b = 0.0;
  for (std::size_t k = 0; k < t.h_grid.size(); ++k) {
    dev_t = std::max(dev_t, std::abs(t.t_values[k] - kTwoPi));
    dev_b = std::max(dev_b, std::abs(t.b2_values[k] / (2.0 * t.h_grid[k]) - 1.0));
  }
  CHECK(dev_t <= 1e-6);
  CHECK(dev_b <= 1e-6);
  const Coeffs c = t.lookup(0.5);
  CHECK(c.t == doctest::Approx(kTwoPi).epsilon(1e-6));
  CHECK(c.b2 == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(t.lookup(0.0).b2 == 0.0);
  CHECK(t.lookup(0.0).t == doctest::Approx(kTwoPi).epsilon(1e-9));
  // F(h) = sqrt(2h) for B^2 = 2h
  for (double h : {1e-3, 0.5, 2.0})
    CHECK(t.f_metric(h) == doctest::Approx(std::sqrt(2.0 * h)).epsilon(1e-6));
  CHECK(t.h_of_f(1.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(t.inv_b2_integral(1.0, 2.0) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-8));
  CHECK(t.inv_b2_integral(2.0, 1.0) == t.inv_b2_integral(1.0, 2.0));
  CHECK(t.inv_b2_integral(1e-8, 1.0) == doctest::Approx(0.5 * std::log(1e8)).epsilon(1e-6));
  CHECK(std::isinf(t.inv_b2_integral(0.0, 1.0)));
  CHECK_THROWS_AS(t.lookup(-0.1), Error);
  CHECK_THROWS_AS(t.lookup(t.h_hi + 0.1), Error);
}

TEST_CASE("table: grid shape") {
  TabulateOptions opt;
  const auto g = coefficient_grid(0.0, 0.25, true, true, opt);
  CHECK(g.front() == doctest::Approx(1e-4));
  CHECK(g.back() == doctest::Approx(0.25 - 1e-4));
  for (std::size_t k = 1; k < g.size(); ++k) CHECK(g[k] > g[k - 1]);
  opt.n_interior = 8;
  CHECK_THROWS_AS(coefficient_grid(0.0, 1.0, true, true, opt), Error);
}

TEST_CASE("table: double-well minimum edge") {
  const EdgeCoefficientTable& t = dw_min_table();
  for (std::size_t k = 0; k < t.h_grid.size(); ++k) {
    CHECK(t.t_values[k] > 0.0);
    CHECK(t.b2_values[k] > 0.0);
  }
  // B^2 decreases to 0 toward the minimum
  for (std::size_t k = 1; k < 8; ++k) CHECK(t.b2_values[k] > t.b2_values[k - 1]);
  CHECK(t.b2_values.front() < 1e-3);
  CHECK(t.lookup(0.0).b2 == 0.0);
  CHECK(t.lookup(0.0).t == doctest::Approx(kTwoPi / std::sqrt(2.0)).epsilon(1e-9));
  // saddle end
  const Coeffs at_saddle = t.lookup(0.25);
  CHECK(at_saddle.b2 == 0.0);
  CHECK(std::isinf(at_saddle.t));
  REQUIRE(t.hi_fit);
  CHECK(t.hi_fit->points >= 6);
  CHECK(t.hi_fit->r2 >= 0.99);
  CHECK(t.hi_fit->b > 0.0);
  // nodes are reproduced
  for (std::size_t k = 0; k < t.h_grid.size(); k += 7) {
    const Coeffs c = t.lookup(t.h_grid[k]);
    CHECK(c.t == t.t_values[k]);
    CHECK(c.b2 == t.b2_values[k]);
  }
  // B^2 vanishes only logarithmically at the saddle, so 1 / B^2 stays integrable
  const double near = t.inv_b2_integral(0.2, 0.25);
  CHECK(std::isfinite(near));
  CHECK(near > t.inv_b2_integral(0.2, 0.25 - 1e-4));
  CHECK(t.b2(0.25 - 1e-6) > 0.0);
  CHECK(t.b2(0.25 - 1e-6) < t.b2(0.25 - 1e-4));
  const double lip = t.lipschitz_tb2(0.02, 0.23);
  CHECK(std::isfinite(lip));
  CHECK(lip > 0.0);
  MESSAGE("empirical Lipschitz constant of T*B^2 on [0.02, 0.23]: " << lip);
  CHECK(t.f_metric(t.h_hi) == doctest::Approx(t.f_max()));
  CHECK(t.h_of_f(0.5 * t.f_max()) > t.h_lo);
  CHECK(t.f_metric(t.h_of_f(0.3 * t.f_max())) == doctest::Approx(0.3 * t.f_max()).epsilon(1e-10));
}

TEST_CASE("tables: lookup and coverage") {
  const CoefficientTables tabs = CoefficientTables::build(harmonic(), harmonic_graph());
  CHECK(tabs.covers(0));
  CHECK_FALSE(tabs.covers(3));
  CHECK(tabs.t_min() == doctest::Approx(kTwoPi).epsilon(1e-6));
  try {
    (void)tabs.table(3);
    FAIL("expected UncoveredEdge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UncoveredEdge);
  }
}

TEST_CASE("pchip reproduces nodes and monotone data") {
  const Pchip p({0, 1, 2, 3, 4}, {0, 0.1, 0.5, 0.55, 2});
  CHECK(p(2.0) == 0.5);
  double prev = -1.0;
  for (double x = 0.0; x <= 4.0; x += 0.01) {
    CHECK(p(x) >= prev - 1e-15);
    prev = p(x);
  }
}
