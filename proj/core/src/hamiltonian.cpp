#include "reebldp/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "reebldp/errors.hpp"
#include "reebldp/marching_squares.hpp"

namespace reebldp {

// ---------------------------------------------------------------- Sigma

Sigma Sigma::identity(int l) {
  if (l < 2 || l > kMaxNoiseDim) throw Error(ErrorCode::ConfigError, "identity sigma needs 2 <= l <= 4");
  Sigma s;
  s.cols_ = l;
  s.value_.cols = l;
  s.value_.m[0] = 1.0;  // column 0 = e_x
  s.value_.m[3] = 1.0;  // column 1 = e_y
  return s;
}

Sigma Sigma::constant(const std::vector<std::vector<double>>& rows) {
  if (rows.size() != 2 || rows[0].empty() || rows[0].size() != rows[1].size() ||
      rows[0].size() > static_cast<std::size_t>(kMaxNoiseDim)) {
    throw Error(ErrorCode::ConfigError, "sigma must be 2 x l with 1 <= l <= 4");
  }
  Sigma s;
  s.cols_ = static_cast<int>(rows[0].size());
  s.value_.cols = s.cols_;
  for (int k = 0; k < s.cols_; ++k) {
    s.value_.m[2 * k] = rows[0][k];
    s.value_.m[2 * k + 1] = rows[1][k];
  }
  return s;
}

Sigma Sigma::polynomial(std::vector<std::vector<Poly2>> entries) {
  if (entries.size() != 2 || entries[0].empty() || entries[0].size() != entries[1].size() ||
      entries[0].size() > static_cast<std::size_t>(kMaxNoiseDim)) {
    throw Error(ErrorCode::ConfigError, "sigma must be 2 x l with 1 <= l <= 4");
  }
  Sigma s;
  s.cols_ = static_cast<int>(entries[0].size());
  s.constant_ = true;
  for (int k = 0; k < s.cols_; ++k) {
    for (int r = 0; r < 2; ++r) {
      const Poly2& p = entries[r][k];
      if (!p.is_constant()) s.constant_ = false;
      s.entries_.push_back(p);
    }
  }
  s.value_.cols = s.cols_;
  if (s.constant_) {
    for (std::size_t q = 0; q < s.entries_.size(); ++q) s.value_.m[q] = s.entries_[q](Vec2{});
    s.entries_.clear();
  }
  return s;
}

SigmaValue Sigma::operator()(Vec2 p) const noexcept {
  if (constant_) return value_;
  SigmaValue v;
  v.cols = cols_;
  for (std::size_t q = 0; q < entries_.size(); ++q) v.m[q] = entries_[q](p);
  return v;
}

// ---------------------------------------------------------------- system

HamiltonianSystem::HamiltonianSystem(std::string name, Poly2 h, Sigma sigma, Box box)
    : name_(std::move(name)), h_(std::move(h)), sigma_(std::move(sigma)), box_(box) {
  if (!(box_.xmax > box_.xmin) || !(box_.ymax > box_.ymin)) {
    throw Error(ErrorCode::ConfigError, "empty working box");
  }
  hx_ = h_.dx();
  hy_ = h_.dy();
  hxx_ = hx_.dx();
  hxy_ = hx_.dy();
  hyy_ = hy_.dy();
}

Box HamiltonianSystem::default_box(std::string_view name) {
  if (name == "harmonic") return {-4.0, 4.0, -4.0, 4.0};
  if (name == "doublewell") return {-2.5, 2.5, -2.5, 2.5};
  if (name == "canonical_saddle") return {-1.0, 1.0, -1.0, 1.0};
  throw Error(ErrorCode::ConfigError, "unknown builtin system '" + std::string(name) + "'");
}

HamiltonianSystem HamiltonianSystem::builtin(std::string_view name) {
  return builtin(name, Sigma::identity());
}

HamiltonianSystem HamiltonianSystem::builtin(std::string_view name, Sigma sigma) {
  const Box box = default_box(name);
  Poly2 h;
  if (name == "harmonic") {
    h = Poly2({{2, 0, 0.5}, {0, 2, 0.5}});
  } else if (name == "doublewell") {
    h = Poly2({{4, 0, 0.25}, {2, 0, -0.5}, {0, 0, 0.25}, {0, 2, 0.5}});
  } else {
    h = Poly2({{2, 0, 1.0}, {0, 2, -1.0}});
  }
  return HamiltonianSystem(std::string(name), std::move(h), std::move(sigma), box);
}

FieldSample HamiltonianSystem::evaluate(Vec2 p) const noexcept {
  FieldSample s;
  s.h = h_(p);
  s.grad = grad(p);
  s.hess = hess(p);
  const SigmaValue sv = sigma_(p);
  const Mat2 a = sv.diffusion();
  s.ah = 0.5 * (a.a * s.hess.a + 2.0 * a.b * s.hess.b + a.d * s.hess.d);
  for (int k = 0; k < sv.cols; ++k) {
    const double c = s.grad.x * sv.row0(k) + s.grad.y * sv.row1(k);
    s.g2 += c * c;
  }
  return s;
}

// ---------------------------------------------------------------- critical points

std::string_view to_string(CriticalKind k) {
  switch (k) {
    case CriticalKind::Minimum: return "minimum";
    case CriticalKind::Maximum: return "maximum";
    case CriticalKind::Saddle: return "saddle";
  }
  return "?";
}

namespace {

bool spans_zero(double a, double b, double c, double d) {
  const double lo = std::min({a, b, c, d});
  const double hi = std::max({a, b, c, d});
  return lo <= 0.0 && hi >= 0.0;
}

struct NewtonResult {
  bool converged = false;
  Vec2 x;
};

NewtonResult newton_critical(const HamiltonianSystem& sys, Vec2 x, const Box& box) {
  const double pad = 0.05 * std::max(box.width(), box.height());
  for (int it = 0; it < 100; ++it) {
    const Vec2 g = sys.grad(x);
    const Mat2 hs = sys.hess(x);
    const double gn = norm(g);
    if (gn < 1e-14 * std::max(1.0, hs.op_norm())) return {true, x};
    if (std::abs(hs.det()) < 1e-300) return {false, x};
    const Vec2 step = hs.inverse() * g;
    double lam = 1.0;
    Vec2 trial = x - step;
    // damping on |grad H|
    while (norm(sys.grad(trial)) > gn && lam > 1e-6) {
      lam *= 0.5;
      trial = x - lam * step;
    }
    if (!std::isfinite(trial.x) || !std::isfinite(trial.y)) return {false, x};
    if (trial.x < box.xmin - pad || trial.x > box.xmax + pad || trial.y < box.ymin - pad ||
        trial.y > box.ymax + pad) {
      return {false, trial};
    }
    const double moved = norm(trial - x);
    x = trial;
    if (moved < 1e-15 * std::max(1.0, norm(x))) break;
  }
  const double res = norm(sys.grad(x));
  return {res < 1e-10 * std::max(1.0, sys.hess(x).op_norm()), x};
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const HamiltonianSystem& sys, const Box& box,
                                                int grid_n) {
  if (grid_n < 32) throw Error(ErrorCode::InvalidArgument, "grid_n must be at least 32");
  const int n = grid_n;
  const double dx = box.width() / (n - 1);
  const double dy = box.height() / (n - 1);
  std::vector<Vec2> gv(static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      gv[static_cast<std::size_t>(j) * n + i] = sys.grad({box.xmin + i * dx, box.ymin + j * dy});
  auto at = [&](int i, int j) { return gv[static_cast<std::size_t>(j) * n + i]; };

  std::vector<CriticalPoint> found;
  int seeds = 0;
  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const Vec2 a = at(i, j), b = at(i + 1, j), c = at(i + 1, j + 1), d = at(i, j + 1);
      if (!spans_zero(a.x, b.x, c.x, d.x) || !spans_zero(a.y, b.y, c.y, d.y)) continue;
      ++seeds;
      const Vec2 seed{box.xmin + (i + 0.5) * dx, box.ymin + (j + 0.5) * dy};
      const NewtonResult nr = newton_critical(sys, seed, box);
      if (!nr.converged || !box.contains(nr.x)) continue;
      const bool dup = std::any_of(found.begin(), found.end(), [&](const CriticalPoint& cp) {
        return norm(cp.location - nr.x) < 1e-6;
      });
      if (dup) continue;
      const Mat2 hs = sys.hess(nr.x);
      if (std::abs(hs.det()) < 1e-8) {
        std::ostringstream os;
        os << "degenerate critical point at (" << nr.x.x << ", " << nr.x.y << ")";
        throw Error(ErrorCode::DegenerateCritical, os.str());
      }
      const SymEigen e = sym_eigen(hs.a, hs.b, hs.d);
      CriticalPoint cp;
      cp.location = nr.x;
      cp.h_value = sys.h(nr.x);
      cp.hess_eigenvalues = {e.lo, e.hi};
      if (e.lo > 0.0) cp.kind = CriticalKind::Minimum;
      else if (e.hi < 0.0) cp.kind = CriticalKind::Maximum;
      else cp.kind = CriticalKind::Saddle;
      found.push_back(cp);
    }
  }
  if (seeds > 0 && found.empty()) {
    throw Error(ErrorCode::NonConvergence, "Newton failed from every sign-change seed");
  }
  std::sort(found.begin(), found.end(), [](const CriticalPoint& p, const CriticalPoint& q) {
    if (p.h_value != q.h_value) return p.h_value < q.h_value;
    if (p.location.x != q.location.x) return p.location.x < q.location.x;
    return p.location.y < q.location.y;
  });
  return found;
}

// ---------------------------------------------------------------- assumptions

bool AssumptionReport::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return c.passed; });
}

const AssumptionCheck* AssumptionReport::find(std::string_view name) const noexcept {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

AssumptionCheck check_smoothness(const HamiltonianSystem& sys, const Box& box, int n) {
  AssumptionCheck c;
  c.name = "smoothness";
  double max_norm = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p{box.xmin + box.width() * i / (n - 1), box.ymin + box.height() * j / (n - 1)};
      max_norm = std::max(max_norm, sys.hess(p).op_norm());
    }
  c.values["max_hessian_norm"] = max_norm;
  c.passed = std::isfinite(max_norm);
  c.detail = "second derivatives bounded on the working box";
  return c;
}

AssumptionCheck check_growth(const HamiltonianSystem& sys, double ring_radius) {
  AssumptionCheck c;
  c.name = "growth";
  constexpr int kAngles = 720;
  double a1 = std::numeric_limits<double>::infinity();
  double a2 = a1, a3 = a1;
  for (int k = 0; k < kAngles; ++k) {
    const double th = 2.0 * std::numbers::pi * k / kAngles;
    const Vec2 p{ring_radius * std::cos(th), ring_radius * std::sin(th)};
    const double r2 = ring_radius * ring_radius;
    a1 = std::min(a1, sys.h(p) / r2);
    a2 = std::min(a2, norm(sys.grad(p)) / ring_radius);
    a3 = std::min(a3, sys.hess(p).trace());
  }
  c.values["A1"] = a1;
  c.values["A2"] = a2;
  c.values["A3"] = a3;
  c.values["ring_radius"] = ring_radius;
  c.passed = a1 > 0.0 && a2 > 0.0 && a3 > 0.0;
  c.detail = "empirical constants on the sampled ring";
  return c;
}

AssumptionCheck check_diffusion(const HamiltonianSystem& sys, const Box& box, int n) {
  AssumptionCheck c;
  c.name = "diffusion";
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Vec2 p{box.xmin + box.width() * i / (n - 1), box.ymin + box.height() * j / (n - 1)};
      const Mat2 a = sys.sigma(p).diffusion();
      const SymEigen e = sym_eigen(a.a, a.b, a.d);
      lo = std::min(lo, e.lo);
      hi = std::max(hi, e.hi);
    }
  c.values["lambda_min"] = lo;
  c.values["lambda_max"] = hi;
  c.passed = lo > 0.0 && std::isfinite(hi);
  c.detail = "spectrum of sigma sigma^* on the working box";
  return c;
}

}  // namespace

AssumptionReport check_assumptions(const HamiltonianSystem& sys, const Box& box, double ring_radius,
                                   int grid_n) {
  AssumptionReport rep;
  rep.checks.push_back(check_smoothness(sys, box, grid_n));
  rep.checks.push_back(check_growth(sys, ring_radius));

  AssumptionCheck crit;
  crit.name = "critical_points";
  std::vector<CriticalPoint> cps;
  try {
    cps = find_critical_points(sys, box, std::max(grid_n, 32));
    crit.passed = !cps.empty();
    crit.values["count"] = static_cast<double>(cps.size());
    double min_det = std::numeric_limits<double>::infinity();
    for (const auto& cp : cps)
      min_det = std::min(min_det, std::abs(cp.hess_eigenvalues[0] * cp.hess_eigenvalues[1]));
    crit.values["min_abs_det"] = min_det;
    crit.detail = crit.passed ? "finitely many nondegenerate critical points" : "no critical point found";
  } catch (const Error& e) {
    crit.passed = false;
    crit.detail = e.what();
  }
  rep.checks.push_back(crit);

  AssumptionCheck sep;
  sep.name = "separatrix";
  sep.passed = crit.passed;
  if (!crit.passed) sep.detail = "skipped: critical points unavailable";
  double hscale = 1.0;
  for (const auto& cp : cps) hscale = std::max(hscale, std::abs(cp.h_value));
  int shared = 0;
  for (std::size_t a = 0; a < cps.size(); ++a)
    for (std::size_t b = a + 1; b < cps.size(); ++b)
      if ((cps[a].kind == CriticalKind::Saddle || cps[b].kind == CriticalKind::Saddle) &&
          std::abs(cps[a].h_value - cps[b].h_value) < 1e-9 * hscale) {
        ++shared;
      }
  sep.values["shared_level_pairs"] = shared;
  if (shared > 0) sep.passed = false;
  // component census on either side of each saddle level
  const int census_n = std::max(grid_n, 256);
  const ScalarGrid grid(box, census_n, [&sys](Vec2 p) { return sys.h(p); });
  constexpr double kDelta = 1e-3;
  int bad = 0;
  for (const auto& cp : cps) {
    if (cp.kind != CriticalKind::Saddle) continue;
    const int below = level_census(grid, cp.h_value - kDelta).components;
    const int above = level_census(grid, cp.h_value + kDelta).components;
    if (std::abs(above - below) != 1) ++bad;
  }
  sep.values["saddles_failing_census"] = bad;
  if (bad > 0) sep.passed = false;
  if (crit.passed) {
    sep.detail = sep.passed ? "each critical level carries one critical point"
                            : "a critical level carries more than one critical point";
  }
  rep.checks.push_back(sep);

  rep.checks.push_back(check_diffusion(sys, box, grid_n));
  return rep;
}

double positive_drift_margin(const HamiltonianSystem& sys, const CriticalPoint& minimum,
                             double radius, int n_radii, int n_angles) {
  if (minimum.kind != CriticalKind::Minimum) {
    throw Error(ErrorCode::BadKind, "positive drift margin needs a minimum, got " +
                                        std::string(to_string(minimum.kind)));
  }
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= n_radii; ++k) {
    const double r = radius * k / n_radii;
    for (int a = 0; a < n_angles; ++a) {
      const double th = 2.0 * std::numbers::pi * a / n_angles;
      const Vec2 p = minimum.location + Vec2{r * std::cos(th), r * std::sin(th)};
      const FieldSample s = sys.evaluate(p);
      const double hrel = s.h - minimum.h_value;
      margin = std::min(margin, 4.0 * hrel * s.ah - s.g2);
    }
  }
  return margin;
}

}  // namespace reebldp
