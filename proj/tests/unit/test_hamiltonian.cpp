#include "doctest.h"

#include <cmath>
#include <random>

#include "reebldp/errors.hpp"
#include "reebldp/hamiltonian.hpp"
#include "reebldp/system_config.hpp"

using namespace reebldp;

namespace {

HamiltonianSystem equal_saddles() {
  // (x^2-1)^2/4 + (y^2-1)^2/4
  Poly2 h({{4, 0, 0.25}, {2, 0, -0.5}, {0, 4, 0.25}, {0, 2, -0.5}, {0, 0, 0.5}});
  return HamiltonianSystem("equal_saddles", h, Sigma::identity(), {-2.5, 2.5, -2.5, 2.5});
}

}  // namespace

TEST_CASE("evaluate: harmonic at (1,0)") {
  const auto sys = HamiltonianSystem::builtin("harmonic");
  const FieldSample s = sys.evaluate({1.0, 0.0});
  CHECK(s.h == doctest::Approx(0.5));
  CHECK(s.grad.x == doctest::Approx(1.0));
  CHECK(s.grad.y == doctest::Approx(0.0));
  CHECK(s.ah == doctest::Approx(1.0));
  CHECK(s.g2 == doctest::Approx(1.0));
}

TEST_CASE("evaluate: double well at the saddle") {
  const auto sys = HamiltonianSystem::builtin("doublewell");
  const FieldSample s = sys.evaluate({0.0, 0.0});
  CHECK(s.h == doctest::Approx(0.25));
  CHECK(s.ah == doctest::Approx(0.0));
  CHECK(s.g2 == 0.0);
  CHECK(s.grad.x == 0.0);
  CHECK(s.grad.y == 0.0);
}

TEST_CASE("evaluate: contractions with a general constant sigma") {
  const auto sys = HamiltonianSystem::builtin("doublewell", Sigma::constant({{1.0, 0.5, 0.0}, {0.2, 0.0, 2.0}}));
  const Vec2 p{0.7, -0.3};
  const FieldSample s = sys.evaluate(p);
  const SigmaValue sv = sys.sigma(p);
  double ah = 0.0, g2 = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double col[2] = {sv.row0(k), sv.row1(k)};
    const double hs[2][2] = {{s.hess.a, s.hess.b}, {s.hess.c, s.hess.d}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) ah += 0.5 * col[i] * col[j] * hs[i][j];
    const double c = s.grad.x * col[0] + s.grad.y * col[1];
    g2 += c * c;
  }
  CHECK(s.ah == doctest::Approx(ah).epsilon(1e-14));
  CHECK(s.g2 == doctest::Approx(g2).epsilon(1e-14));
}

TEST_CASE("finite-difference consistency of grad and hess") {
  const auto sys = HamiltonianSystem::builtin("doublewell");
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double st = 1e-4;
  for (int k = 0; k < 200; ++k) {
    const Vec2 p{u(rng), u(rng)};
    const Vec2 g = sys.grad(p);
    const double fx = (sys.h({p.x + st, p.y}) - sys.h({p.x - st, p.y})) / (2 * st);
    const double fy = (sys.h({p.x, p.y + st}) - sys.h({p.x, p.y - st})) / (2 * st);
    const double scale = std::max(1.0, norm(g));
    CHECK(std::abs(fx - g.x) / scale < 1e-6);
    CHECK(std::abs(fy - g.y) / scale < 1e-6);
    const Mat2 hs = sys.hess(p);
    const Vec2 gxp = sys.grad({p.x + st, p.y}), gxm = sys.grad({p.x - st, p.y});
    const Vec2 gyp = sys.grad({p.x, p.y + st}), gym = sys.grad({p.x, p.y - st});
    const double hscale = std::max(1.0, hs.op_norm());
    CHECK(std::abs((gxp.x - gxm.x) / (2 * st) - hs.a) / hscale < 1e-5);
    CHECK(std::abs((gyp.x - gym.x) / (2 * st) - hs.b) / hscale < 1e-5);
    CHECK(std::abs((gyp.y - gym.y) / (2 * st) - hs.d) / hscale < 1e-5);
    CHECK(sys.evaluate(p).ah == doctest::Approx(0.5 * hs.trace()).epsilon(1e-15));
  }
}

TEST_CASE("critical points: builtins") {
  SUBCASE("harmonic") {
    const auto sys = HamiltonianSystem::builtin("harmonic");
    const auto cps = find_critical_points(sys, sys.box());
    REQUIRE(cps.size() == 1);
    CHECK(cps[0].kind == CriticalKind::Minimum);
    CHECK(norm(cps[0].location) < 1e-12);
    CHECK(cps[0].h_value == doctest::Approx(0.0));
  }
  SUBCASE("double well") {
    const auto sys = HamiltonianSystem::builtin("doublewell");
    const auto cps = find_critical_points(sys, sys.box());
    REQUIRE(cps.size() == 3);
    CHECK(cps[0].kind == CriticalKind::Minimum);
    CHECK(cps[0].location.x == doctest::Approx(-1.0));
    CHECK(cps[1].kind == CriticalKind::Minimum);
    CHECK(cps[1].location.x == doctest::Approx(1.0));
    CHECK(cps[2].kind == CriticalKind::Saddle);
    CHECK(cps[2].h_value == doctest::Approx(0.25));
    for (const auto& cp : cps) {
      CHECK(norm(sys.grad(cp.location)) < 1e-10);
      CHECK(std::abs(cp.location.y) < 1e-10);
    }
  }
  SUBCASE("canonical saddle") {
    const auto sys = HamiltonianSystem::builtin("canonical_saddle");
    const auto cps = find_critical_points(sys, sys.box());
    REQUIRE(cps.size() == 1);
    CHECK(cps[0].kind == CriticalKind::Saddle);
    CHECK(cps[0].h_value == doctest::Approx(0.0));
  }
}

TEST_CASE("critical points are stable under seed-grid refinement") {
  const auto sys = HamiltonianSystem::builtin("doublewell");
  const auto a = find_critical_points(sys, sys.box(), 64);
  const auto b = find_critical_points(sys, sys.box(), 128);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(norm(a[k].location - b[k].location) < 1e-8);
    CHECK(a[k].kind == b[k].kind);
  }
}

TEST_CASE("critical points: degenerate ring of minima is rejected") {
  // (x^2 + y^2 - 1)^2
  Poly2 h({{4, 0, 1.0}, {0, 4, 1.0}, {2, 2, 2.0}, {2, 0, -2.0}, {0, 2, -2.0}, {0, 0, 1.0}});
  HamiltonianSystem sys("ring", h, Sigma::identity(), {-2, 2, -2, 2});
  CHECK_THROWS_AS(find_critical_points(sys, sys.box()), Error);
  try {
    find_critical_points(sys, sys.box());
  } catch (const Error& e) {
    CHECK((e.code() == ErrorCode::DegenerateCritical || e.code() == ErrorCode::NonConvergence));
  }
}

TEST_CASE("assumptions: harmonic passes with closed-form constants") {
  const auto sys = HamiltonianSystem::builtin("harmonic");
  const auto rep = check_assumptions(sys, sys.box(), 10.0);
  CHECK(rep.all_passed());
  const auto* g = rep.find("growth");
  REQUIRE(g);
  CHECK(g->values.at("A1") == doctest::Approx(0.5));
  CHECK(g->values.at("A2") == doctest::Approx(1.0));
  CHECK(g->values.at("A3") == doctest::Approx(2.0));
}

TEST_CASE("assumptions: canonical saddle fails growth") {
  const auto sys = HamiltonianSystem::builtin("canonical_saddle");
  const auto rep = check_assumptions(sys, sys.box(), 10.0);
  REQUIRE(rep.find("growth"));
  CHECK_FALSE(rep.find("growth")->passed);
  CHECK_FALSE(rep.all_passed());
}

TEST_CASE("assumptions: equal-height saddles fail the separatrix check") {
  const auto sys = equal_saddles();
  const auto rep = check_assumptions(sys, sys.box(), 10.0);
  REQUIRE(rep.find("separatrix"));
  CHECK_FALSE(rep.find("separatrix")->passed);
  CHECK(rep.find("growth")->passed);
}

TEST_CASE("assumptions: double well") {
  const auto sys = HamiltonianSystem::builtin("doublewell");
  const auto rep = check_assumptions(sys, sys.box(), 10.0);
  for (const char* name : {"smoothness", "critical_points", "separatrix", "diffusion"}) {
    REQUIRE(rep.find(name));
    CHECK_MESSAGE(rep.find(name)->passed, name);
  }
  // Laplacian 3x^2 vanishes on the y-axis, so A3 = 0 on every ring
  const auto* g = rep.find("growth");
  CHECK(g->values.at("A1") > 0.0);
  CHECK(g->values.at("A2") > 0.0);
  CHECK(g->values.at("A3") == doctest::Approx(0.0));
  CHECK_FALSE(g->passed);
}

TEST_CASE("positive drift margin") {
  SUBCASE("harmonic: margin is 2H on the innermost ring") {
    const auto sys = HamiltonianSystem::builtin("harmonic");
    const auto cp = find_critical_points(sys, sys.box()).at(0);
    const double m = positive_drift_margin(sys, cp, 0.5);
    const double r = 0.5 / 100;
    CHECK(m == doctest::Approx(2.0 * 0.5 * r * r).epsilon(1e-9));
    CHECK(m > 0.0);
  }
  SUBCASE("double well minima") {
    const auto sys = HamiltonianSystem::builtin("doublewell");
    for (const auto& cp : find_critical_points(sys, sys.box())) {
      if (cp.kind != CriticalKind::Minimum) continue;
      CHECK(positive_drift_margin(sys, cp, 0.2) > 0.0);
    }
  }
  SUBCASE("saddle is rejected") {
    const auto sys = HamiltonianSystem::builtin("doublewell");
    const auto cps = find_critical_points(sys, sys.box());
    try {
      positive_drift_margin(sys, cps.at(2), 0.2);
      FAIL("expected BadKind");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::BadKind);
    }
  }
}

TEST_CASE("system config parsing") {
  SUBCASE("builtin with default box") {
    const auto sys = system_from_json(nlohmann::json::parse(R"({"hamiltonian":{"builtin":"doublewell"}})"));
    CHECK(sys.box().xmax == 2.5);
    CHECK(sys.h({0, 0}) == doctest::Approx(0.25));
  }
  SUBCASE("polynomial with constant sigma") {
    const auto sys = system_from_json(nlohmann::json::parse(
        R"({"hamiltonian":{"poly":[[2,0,1.0],[0,2,0.5]]},"sigma":{"constant":[[2,0],[0,1]]},"box":[-1,1,-1,1]})"));
    CHECK(sys.h({1, 1}) == doctest::Approx(1.5));
    CHECK(sys.evaluate({1, 0}).g2 == doctest::Approx(16.0));
  }
  SUBCASE("polynomial sigma") {
    const auto sys = system_from_json(nlohmann::json::parse(
        R"({"hamiltonian":{"builtin":"harmonic"},"sigma":{"poly":[[[[0,0,1.0],[1,0,0.1]],[]],[[],[[0,0,1.0]]]]}})"));
    CHECK_FALSE(sys.sigma_field().is_constant());
    CHECK(sys.sigma({2.0, 0.0}).row0(0) == doctest::Approx(1.2));
  }
  SUBCASE("malformed documents") {
    auto bad = [](const char* s) {
      try {
        system_from_json(nlohmann::json::parse(s));
      } catch (const Error& e) {
        return e.code() == ErrorCode::ConfigError;
      }
      return false;
    };
    CHECK(bad(R"({})"));
    CHECK(bad(R"({"hamiltonian":{"builtin":"nope"}})"));
    CHECK(bad(R"({"hamiltonian":{"poly":[[1,2]]},"box":[0,1,0,1]})"));
    CHECK(bad(R"({"hamiltonian":{"poly":[[2,0,1]]}})"));
    CHECK(bad(R"({"hamiltonian":{"builtin":"harmonic"},"sigma":{"constant":[[1,0]]}})"));
  }
  SUBCASE("missing file") {
    try {
      load_system("/nonexistent/config.json");
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ConfigError);
    }
  }
}
