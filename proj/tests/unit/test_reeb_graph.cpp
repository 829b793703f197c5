#include "doctest.h"

#include <cmath>
#include <random>

#include "reebldp/errors.hpp"
#include "reebldp/ode.hpp"
#include "reebldp/reeb_graph.hpp"

using namespace reebldp;

namespace {

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

}  // namespace

TEST_CASE("marching squares census of the double well") {
  const ScalarGrid grid(dw().box(), 256, [](Vec2 p) { return dw().h(p); });
  CHECK(level_census(grid, 0.1).components == 2);
  CHECK(level_census(grid, 0.5).components == 1);
  CHECK(level_census(grid, 0.249).components == 2);
  CHECK(level_census(grid, 0.251).components == 1);
}

TEST_CASE("graph: harmonic is one vertex and one unbounded edge") {
  const auto sys = HamiltonianSystem::builtin("harmonic");
  const auto g = ReebGraph::build(sys, ReebBuildOptions{128});
  REQUIRE(g.vertices().size() == 1);
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].unbounded);
  CHECK(g.edges()[0].h_lo == doctest::Approx(0.0));
  CHECK(g.edges()[0].h_hi == doctest::Approx(8.0));
  CHECK_FALSE(g.vertices()[0].interior);
}

TEST_CASE("graph: double well topology") {
  const auto& g = dw_graph();
  REQUIRE(g.vertices().size() == 3);
  REQUIRE(g.edges().size() == 3);
  int exterior = 0, interior = 0;
  for (const auto& v : g.vertices()) (v.interior ? interior : exterior)++;
  CHECK(exterior == 2);
  CHECK(interior == 1);
  CHECK(g.edges()[0].h_lo == doctest::Approx(0.0));
  CHECK(g.edges()[0].h_hi == doctest::Approx(0.25));
  CHECK(g.edges()[1].h_lo == doctest::Approx(0.0));
  CHECK(g.edges()[1].h_hi == doctest::Approx(0.25));
  CHECK(g.edges()[2].h_lo == doctest::Approx(0.25));
  CHECK(g.edges()[2].h_hi == doctest::Approx(3.125));
  CHECK(g.edges()[2].unbounded);
  // Euler relation with the virtual terminal of the unbounded edge
  CHECK(g.edges().size() == g.vertices().size());
  const auto j = g.to_json();
  CHECK(j["vertices"].size() == 3);
  CHECK(j["edges"].size() == 3);
  CHECK(j["edges"][2]["v_hi"].is_null());
}

TEST_CASE("graph: topology is independent of grid resolution") {
  const auto g1 = ReebGraph::build(dw(), ReebBuildOptions{256});
  const auto g2 = ReebGraph::build(dw(), ReebBuildOptions{512});
  CHECK(g1.to_json()["edges"] == g2.to_json()["edges"]);
  CHECK(g1.to_json()["vertices"] == g2.to_json()["vertices"]);
}

TEST_CASE("graph: equal saddle levels are rejected") {
  Poly2 h({{4, 0, 0.25}, {2, 0, -0.5}, {0, 4, 0.25}, {0, 2, -0.5}, {0, 0, 0.5}});
  HamiltonianSystem sys("equal", h, Sigma::identity(), {-2.5, 2.5, -2.5, 2.5});
  try {
    ReebGraph::build(sys, ReebBuildOptions{128});
    FAIL("expected EqualSaddleLevels");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EqualSaddleLevels);
  }
}

TEST_CASE("graph: asymmetric double well with distinct minimum levels") {
  // tilted well: minima at different heights, the shallow one's edge spans two slabs
  Poly2 h({{4, 0, 0.25}, {2, 0, -0.5}, {1, 0, 0.1}, {0, 2, 0.5}});
  HamiltonianSystem sys("tilted", h, Sigma::identity(), {-2.5, 2.5, -2.5, 2.5});
  const auto g = ReebGraph::build(sys, ReebBuildOptions{256});
  CHECK(g.vertices().size() == 3);
  CHECK(g.edges().size() == 3);
  for (const auto& v : g.vertices()) CHECK(v.edges.size() == (v.interior ? 3u : 1u));
}

TEST_CASE("projection examples") {
  const auto& g = dw_graph();
  SUBCASE("critical point maps to its vertex") {
    const GraphPoint p = g.project(dw(), {1.0, 0.0});
    REQUIRE(p.at_vertex);
    CHECK(g.vertex(*p.at_vertex).critical.location.x == doctest::Approx(1.0));
    CHECK(p.edge_id == edge_of_min(g, 1.0));
  }
  SUBCASE("inside the right well") {
    const GraphPoint p = g.project(dw(), {0.9, 0.0});
    CHECK(p.edge_id == edge_of_min(g, 1.0));
    CHECK(p.h == dw().h({0.9, 0.0}));
    CHECK(p.h == doctest::Approx(0.009025).epsilon(1e-12));
    CHECK_FALSE(p.at_vertex);
  }
  SUBCASE("above the saddle") {
    const GraphPoint p = g.project(dw(), {0.0, 2.0});
    CHECK(p.edge_id == g.unbounded_edge());
    CHECK(p.h == doctest::Approx(2.25));
  }
  SUBCASE("left well, far side") {
    CHECK(g.project(dw(), {-1.3, 0.2}).edge_id == edge_of_min(g, -1.0));
  }
  SUBCASE("outside the box") {
    try {
      g.project(dw(), {3.0, 0.0});
      FAIL("expected OutsideBox");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutsideBox);
    }
  }
}

TEST_CASE("projection agrees with the steepest-descent basin oracle") {
  const auto& g = dw_graph();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.8, 1.8);
  int checked = 0;
  for (int k = 0; k < 300; ++k) {
    const Vec2 x{u(rng), u(rng)};
    const double h = dw().h(x);
    if (h > 0.24 || h < 1e-6) continue;
    // descend dx/dt = -grad H to the minimum
    auto rhs = [](double, const ode::State<2>& y) {
      const Vec2 gr = dw().grad({y[0], y[1]});
      return ode::State<2>{-gr.x, -gr.y};
    };
    const auto res = ode::integrate<2>(rhs, 0.0, {x.x, x.y}, 60.0, ode::Options{},
                                       [](double, const auto&, double, const auto&) { return true; });
    const double side = res.y[0] > 0 ? 1.0 : -1.0;
    CHECK(g.project(dw(), x).edge_id == edge_of_min(g, side));
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("graph distance") {
  const auto& g = dw_graph();
  const int e1 = edge_of_min(g, -1.0), e2 = edge_of_min(g, 1.0);
  CHECK(g.distance({e1, 0.1, {}}, {e1, 0.2, {}}) == doctest::Approx(0.1));
  CHECK(g.distance({e1, 0.1, {}}, {e2, 0.1, {}}) == doctest::Approx(0.3));
  CHECK(g.distance({e1, 0.1, {}}, {e1, 0.1, {}}) == 0.0);
  CHECK(g.distance({e1, 0.1, {}}, {2, 1.0, {}}) == doctest::Approx(0.15 + 0.75));

  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_point = [&]() {
    const int e = pick(rng);
    const auto& ed = g.edge(e);
    return GraphPoint{e, ed.h_lo + u(rng) * (std::min(ed.h_hi, 2.0) - ed.h_lo), {}};
  };
  for (int k = 0; k < 1000; ++k) {
    const GraphPoint a = random_point(), b = random_point(), c = random_point();
    CHECK(g.distance(a, b) == g.distance(b, a));
    CHECK(g.distance(a, c) <= g.distance(a, b) + g.distance(b, c) + 1e-12);
  }
}

TEST_CASE("path distance") {
  const auto& g = dw_graph();
  const int e1 = edge_of_min(g, -1.0), e2 = edge_of_min(g, 1.0);
  GraphPath p1, p2, p3;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    p1.times.push_back(t);
    p2.times.push_back(t);
    p1.samples.push_back({e1, 0.1 + 0.01 * k, {}});
    p2.samples.push_back({e2, 0.1, {}});
    p3.times.push_back(t);
    p3.samples.push_back({e1, 0.15 + 0.01 * k, {}});
  }
  CHECK(path_distance(g, p1, p1) == 0.0);
  CHECK(path_distance(g, p1, p3) == doctest::Approx(0.05));
  GraphPath c1 = p1, c2 = p2;
  for (auto& s : c1.samples) s.h = 0.1;
  CHECK(path_distance(g, c1, c2) == doctest::Approx(0.3));

  GraphPath finer;
  for (int k = 0; k <= 20; ++k) {
    finer.times.push_back(0.05 * k);
    finer.samples.push_back({e1, 0.1 + 0.005 * k, {}});
  }
  CHECK(path_distance(g, p1, finer) == doctest::Approx(0.0).epsilon(1e-12));

  GraphPath shorter = p1;
  shorter.times.back() = 0.95;
  try {
    path_distance(g, p1, shorter);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("trajectory projection") {
  const auto& g = dw_graph();
  SUBCASE("constant trajectory") {
    std::vector<Vec2> xs(100, Vec2{0.9, 0.0});
    std::vector<double> ts(100);
    for (int k = 0; k < 100; ++k) ts[k] = 0.01 * k;
    const auto path = project_trajectory(dw(), g, xs, ts);
    for (const auto& s : path.samples) CHECK(s == path.samples.front());
  }
  SUBCASE("deterministic orbit keeps its edge and level") {
    auto rhs = [](double, const ode::State<2>& y) {
      const Vec2 f = dw().flow({y[0], y[1]});
      return ode::State<2>{f.x, f.y};
    };
    std::vector<Vec2> xs;
    std::vector<double> ts;
    ode::State<2> y{0.9, 0.0};
    for (int k = 0; k <= 400; ++k) {
      xs.push_back({y[0], y[1]});
      ts.push_back(0.02 * k);
      y = ode::rk4_step<2>(rhs, 0.0, y, 0.02);
    }
    const auto path = project_trajectory(dw(), g, xs, ts);
    const double h0 = dw().h({0.9, 0.0});
    for (std::size_t k = 0; k < xs.size(); ++k) {
      CHECK(path.samples[k].edge_id == edge_of_min(g, 1.0));
      CHECK(std::abs(path.samples[k].h - h0) < 1e-8);
      CHECK(path.samples[k].h == dw().h(xs[k]));
    }
  }
  SUBCASE("crossing the separatrix") {
    std::vector<Vec2> xs;
    std::vector<double> ts;
    for (int k = 0; k <= 200; ++k) {
      const double s = k / 200.0;
      xs.push_back({0.5 * (1 - s), 1.2 * s});
      ts.push_back(s);
    }
    const auto path = project_trajectory(dw(), g, xs, ts, 8);
    CHECK(path.samples.front().edge_id == edge_of_min(g, 1.0));
    CHECK(path.samples.back().edge_id == g.unbounded_edge());
    // agreement with pointwise projection everywhere
    for (std::size_t k = 0; k < xs.size(); ++k) CHECK(path.samples[k].edge_id == g.project(dw(), xs[k]).edge_id);
  }
  SUBCASE("jump across non-adjacent edges") {
    // an artificial 4-level system is not needed: jump between the wells
    // is adjacent via the saddle, so craft a graph-level check instead
    CHECK(g.adjacent(edge_of_min(g, -1.0), edge_of_min(g, 1.0)));
  }
}
