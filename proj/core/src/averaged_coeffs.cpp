#include "reebldp/averaged_coeffs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "reebldp/errors.hpp"
#include "reebldp/ode.hpp"

namespace reebldp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 16-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 8> kGlX = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                        0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                        0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGlW = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                        0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                        0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < kGlX.size(); ++k) s += kGlW[k] * (f(c - r * kGlX[k]) + f(c + r * kGlX[k]));
  return s * r;
}

Vec2 project_to_level(const HamiltonianSystem& sys, Vec2 p, double h) {
  for (int it = 0; it < 2; ++it) {
    const Vec2 g = sys.grad(p);
    const double g2 = norm2(g);
    if (!(g2 > 0.0)) break;
    p += ((h - sys.h(p)) / g2) * g;
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------- tracing

LevelCurve trace_from_seed(const HamiltonianSystem& sys, Vec2 seed, const TraceOptions& opt) {
  const double h = sys.h(seed);
  auto tangent = [&sys](double, const ode::State<2>& y) {
    const Vec2 g = sys.grad({y[0], y[1]});
    const double n = norm(g);
    if (!(n > 0.0)) throw Error(ErrorCode::DegenerateCurve, "level curve passes through a critical point");
    return ode::State<2>{-g.y / n, g.x / n};
  };
  auto local_scale = [&sys](Vec2 p) {
    const double hn = sys.hess(p).op_norm();
    const double gn = norm(sys.grad(p));
    return hn > 0.0 ? gn / hn : kInf;
  };

  // pass 1: adaptive arc-length integration to find the length
  const Vec2 g0 = sys.grad(seed);
  if (!(norm(g0) > 0.0)) throw Error(ErrorCode::DegenerateCurve, "seed is a critical point");
  const Vec2 tau0 = (1.0 / norm(g0)) * perp(g0);
  auto transversal = [&](const ode::State<2>& y) { return dot(Vec2{y[0], y[1]} - seed, tau0); };

  double min_scale = local_scale(seed);
  double s = 0.0;
  ode::State<2> y{seed.x, seed.y};
  const double scale0 = std::max(1.0, norm(seed));
  double step = std::min(0.05 * std::min(min_scale, 1.0), 0.01 * scale0);
  double length = -1.0;
  ode::State<2> err, k_end;
  std::size_t steps = 0;
  while (steps < opt.max_steps) {
    const ode::State<2> k1 = tangent(s, y);
    ode::State<2> y_new = ode::dp45_step<2>(tangent, s, y, k1, step, err, k_end);
    double en = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double sc = opt.tol * scale0 + opt.tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      en = std::max(en, std::abs(err[i]) / sc);
    }
    if (!(en <= 1.0)) {
      step *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      if (step < 1e-16 * scale0) throw Error(ErrorCode::NoClosure, "step size underflow while tracing");
      continue;
    }
    ++steps;
    const Vec2 pn = project_to_level(sys, {y_new[0], y_new[1]}, h);
    y_new = {pn.x, pn.y};
    min_scale = std::min(min_scale, local_scale(pn));
    const double g_prev = transversal(y), g_new = transversal(y_new);
    if (s + step >= 10.0 * opt.tol && g_prev < 0.0 && g_new >= 0.0) {
      ode::State<2> y_ev;
      auto gfun = [&](const ode::State<2>& q) { return transversal(q); };
      const double sev = ode::locate_event<2>(tangent, s, y, step, gfun, g_prev, g_new, y_ev);
      const double gap = norm(Vec2{y_ev[0], y_ev[1]} - seed);
      if (gap < 1e-5 * (s + sev) + 10.0 * opt.tol) {
        length = s + sev;
        break;
      }
    }
    s += step;
    y = y_new;
    step *= std::clamp(en == 0.0 ? 5.0 : 0.9 * std::pow(en, -0.2), 0.2, 5.0);
    // never step across a feature of the curve
    step = std::min(step, 0.5 * std::max(min_scale, 1e-12));
  }
  if (length < 0.0) {
    std::ostringstream os;
    os << "level curve at h=" << h << " did not close within " << opt.max_steps << " steps";
    throw Error(ErrorCode::NoClosure, os.str());
  }

  // pass 2: fixed-step RK4 on a uniform arc-length grid
  const double ds_target = 0.1 * min_scale / std::max(opt.refine, 1e-3);
  const double nf = std::ceil(length / ds_target);
  const std::size_t n = std::max<std::size_t>(
      static_cast<std::size_t>(256.0 * std::max(opt.refine, 1.0)),
      nf > 5e7 ? static_cast<std::size_t>(5e7) : static_cast<std::size_t>(nf));
  LevelCurve curve;
  curve.h = h;
  curve.length = length;
  curve.ds = length / static_cast<double>(n);
  curve.points.reserve(n);
  ode::State<2> q{seed.x, seed.y};
  for (std::size_t k = 0; k < n; ++k) {
    curve.points.push_back({q[0], q[1]});
    curve.max_residual = std::max(curve.max_residual, std::abs(sys.h({q[0], q[1]}) - h));
    q = ode::rk4_step<2>(tangent, 0.0, q, curve.ds);
    const Vec2 pq = project_to_level(sys, {q[0], q[1]}, h);
    q = {pq.x, pq.y};
  }
  curve.closure_gap = norm(Vec2{q[0], q[1]} - seed);
  return curve;
}

LevelCurve trace_level_curve(const HamiltonianSystem& sys, const ReebGraph& graph, int edge_id, double h,
                             const TraceOptions& opt) {
  const ReebEdge& e = graph.edge(edge_id);
  const double guard = std::max(100.0 * opt.tol, 1e-9);
  const bool near_lo = h - e.h_lo < guard;
  const bool near_hi = !e.unbounded && e.h_hi - h < guard;
  if (near_lo || near_hi) {
    std::ostringstream os;
    os << "h=" << h << " inside the guard band of edge " << edge_id << " [" << e.h_lo << ", " << e.h_hi << "]";
    throw Error(ErrorCode::GuardBand, os.str());
  }
  const Vec2 seed = project_to_level(sys, graph.seed_point(sys, edge_id, h), h);
  LevelCurve c = trace_from_seed(sys, seed, opt);
  c.edge_id = edge_id;
  c.h = h;
  return c;
}

Coeffs compute_coeffs(const HamiltonianSystem& sys, const LevelCurve& curve) {
  double t = 0.0, num = 0.0;
  for (const Vec2& p : curve.points) {
    const FieldSample f = sys.evaluate(p);
    const double gn = norm(f.grad);
    if (gn < 1e-9) throw Error(ErrorCode::DegenerateCurve, "|grad H| below 1e-9 on the curve");
    t += 1.0 / gn;
    num += f.g2 / gn;
  }
  t *= curve.ds;
  num *= curve.ds;
  return {t, t > 0.0 ? num / t : 0.0};
}

Coeffs flow_time_coeffs(const HamiltonianSystem& sys, Vec2 start, double rtol) {
  auto rhs = [&sys](double, const ode::State<3>& y) {
    const Vec2 p{y[0], y[1]};
    const FieldSample f = sys.evaluate(p);
    return ode::State<3>{-f.grad.y, f.grad.x, f.g2};
  };
  const Vec2 f0 = sys.flow(start);
  if (!(norm(f0) > 0.0)) throw Error(ErrorCode::DegenerateCurve, "start is a critical point");
  auto transversal = [&](const ode::State<3>& y) { return dot(Vec2{y[0], y[1]} - start, f0); };
  ode::Options opt;
  opt.rtol = rtol;
  opt.atol = rtol * 1e-2;
  opt.h_init = 1e-4;
  double period = -1.0, integral = 0.0;
  auto obs = [&](double t_prev, const ode::State<3>& y_prev, double t, const ode::State<3>& y) {
    const double a = transversal(y_prev), b = transversal(y);
    if (!(a < 0.0 && b >= 0.0)) return true;
    ode::State<3> y_ev;
    auto g = [&](const ode::State<3>& q) { return transversal(q); };
    const double s = ode::locate_event<3>(rhs, t_prev, y_prev, t - t_prev, g, a, b, y_ev);
    if (norm(Vec2{y_ev[0], y_ev[1]} - start) > 1e-4 * (t + 1.0) * norm(f0)) return true;
    period = t_prev + s;
    integral = y_ev[2];
    return false;
  };
  ode::integrate<3>(rhs, 0.0, {start.x, start.y, 0.0}, 1e6, opt, obs);
  if (period < 0.0) throw Error(ErrorCode::NoClosure, "flow orbit did not return to its start");
  return {period, integral / period};
}

// ---------------------------------------------------------------- tables

std::vector<double> coefficient_grid(double h_lo, double h_hi, bool lo_vertex, bool hi_vertex,
                                     const TabulateOptions& opt) {
  const double w = h_hi - h_lo;
  if (!(w > 0.0)) throw Error(ErrorCode::InvalidArgument, "empty edge range");
  if (opt.n_interior < 16) throw Error(ErrorCode::InvalidArgument, "n_interior must be at least 16");
  std::vector<double> g;
  const double band = w / 8.0;
  if (lo_vertex)
    for (int k = 0;; ++k) {
      const double d = opt.guard * std::pow(10.0, static_cast<double>(k) / opt.per_decade);
      if (d >= band) break;
      g.push_back(h_lo + d);
    }
  if (hi_vertex)
    for (int k = 0;; ++k) {
      const double d = opt.guard * std::pow(10.0, static_cast<double>(k) / opt.per_decade);
      if (d >= band) break;
      g.push_back(h_hi - d);
    }
  const double a = lo_vertex ? h_lo + band : h_lo;
  const double b = hi_vertex ? h_hi - band : h_hi;
  for (int k = 0; k < opt.n_interior; ++k) g.push_back(a + (b - a) * k / (opt.n_interior - 1));
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double v : g) {
    if (!out.empty() && v - out.back() <= 1e-12 * std::max(1.0, std::abs(v))) continue;
    out.push_back(v);
  }
  return out;
}

namespace {

LogLawFit fit_log_law(const std::vector<double>& hs, const std::vector<double>& ts, double h_saddle) {
  LogLawFit f;
  const std::size_t n = hs.size();
  f.points = static_cast<int>(n);
  if (n < 3) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = std::abs(std::log(std::abs(hs[k] - h_saddle)));
    sx += x;
    sy += ts[k];
    sxx += x * x;
    sxy += x * ts[k];
  }
  const double dn = static_cast<double>(n);
  f.b = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  f.a = (sy - f.b * sx) / dn;
  const double mean = sy / dn;
  double ss_tot = 0, ss_res = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = std::abs(std::log(std::abs(hs[k] - h_saddle)));
    ss_res += std::pow(ts[k] - (f.a + f.b * x), 2);
    ss_tot += std::pow(ts[k] - mean, 2);
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

}  // namespace

void EdgeCoefficientTable::finalize() {
  std::vector<double> tx, ty, bx, by;
  if (lo_is_vertex) {
    bx.push_back(h_lo);
    by.push_back(0.0);
    if (!lo_saddle) {
      tx.push_back(h_lo);
      ty.push_back(t_lo_vertex);
    }
  }
  for (std::size_t k = 0; k < h_grid.size(); ++k) {
    tx.push_back(h_grid[k]);
    ty.push_back(t_values[k]);
    bx.push_back(h_grid[k]);
    by.push_back(b2_values[k]);
  }
  if (hi_is_vertex) {
    bx.push_back(h_hi);
    by.push_back(0.0);
    if (!hi_saddle) {
      tx.push_back(h_hi);
      ty.push_back(t_hi_vertex);
    }
  }
  t_interp_ = Pchip(tx, ty);
  b2_interp_ = Pchip(bx, by);
  const std::size_t n = h_grid.size();
  if (n >= 2) {
    tb2_lo_ = t_values[0] * b2_values[0];
    tb2_lo_slope_ = (t_values[1] * b2_values[1] - tb2_lo_) / (h_grid[1] - h_grid[0]);
    tb2_hi_ = t_values[n - 1] * b2_values[n - 1];
    tb2_hi_slope_ = (tb2_hi_ - t_values[n - 2] * b2_values[n - 2]) / (h_grid[n - 1] - h_grid[n - 2]);
  }
  f_h_ = bx;
  f_nodes_.assign(f_h_.size(), 0.0);
  for (std::size_t k = 0; k + 1 < f_h_.size(); ++k)
    f_nodes_[k + 1] = f_nodes_[k] + f_segment(k, f_h_[k], f_h_[k + 1]);
}

double EdgeCoefficientTable::f_segment(std::size_t k, double from, double to) const {
  if (to <= from) return 0.0;
  const double xa = f_h_[k], xb = f_h_[k + 1];
  const bool zero_a = b2_interp_.y()[k] <= 0.0;
  const bool zero_b = b2_interp_.y()[k + 1] <= 0.0;
  auto inv_sqrt = [this](double hh) {
    const double b = b2_at(hh);
    return b > 0.0 ? 1.0 / std::sqrt(b) : kInf;
  };
  if (zero_a && !zero_b) {
    // h = xa + u^2
    auto f = [&](double u) { return 2.0 * u * inv_sqrt(xa + u * u); };
    return gauss16(f, std::sqrt(from - xa), std::sqrt(to - xa));
  }
  if (zero_b && !zero_a) {
    // h = xb - u^2
    auto f = [&](double u) { return 2.0 * u * inv_sqrt(xb - u * u); };
    return gauss16(f, std::sqrt(xb - to), std::sqrt(xb - from));
  }
  if (zero_a && zero_b) {
    const double mid = 0.5 * (xa + xb);
    auto fa = [&](double u) { return 2.0 * u * inv_sqrt(xa + u * u); };
    auto fb = [&](double u) { return 2.0 * u * inv_sqrt(xb - u * u); };
    double s = 0.0;
    if (from < mid) s += gauss16(fa, std::sqrt(from - xa), std::sqrt(std::min(to, mid) - xa));
    if (to > mid) s += gauss16(fb, std::sqrt(xb - to), std::sqrt(xb - std::max(from, mid)));
    return s;
  }
  return gauss16(inv_sqrt, from, to);
}

Coeffs EdgeCoefficientTable::lookup(double h) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(h));
  if (h < h_lo - tol || h > h_hi + tol || std::isnan(h)) {
    std::ostringstream os;
    os << "h=" << h << " outside the span [" << h_lo << ", " << h_hi << "] of edge " << edge_id;
    throw Error(ErrorCode::OutOfSpan, os.str());
  }
  h = std::clamp(h, h_lo, h_hi);
  if (lo_is_vertex && h == h_lo) return {lo_saddle ? kInf : t_lo_vertex, 0.0};
  if (hi_is_vertex && h == h_hi) return {hi_saddle ? kInf : t_hi_vertex, 0.0};
  return {t_at(h), b2_at(h)};
}

double EdgeCoefficientTable::t_at(double h) const {
  if (lo_saddle && lo_fit && h < h_grid.front()) return lo_fit->a + lo_fit->b * std::abs(std::log(h - h_lo));
  if (hi_saddle && hi_fit && h > h_grid.back()) return hi_fit->a + hi_fit->b * std::abs(std::log(h_hi - h));
  return t_interp_(h);
}

double EdgeCoefficientTable::b2_at(double h) const {
  if (lo_saddle && lo_fit && h < h_grid.front()) {
    if (h <= h_lo) return 0.0;
    return std::max(0.0, tb2_lo_ + tb2_lo_slope_ * (h - h_grid.front())) / t_at(h);
  }
  if (hi_saddle && hi_fit && h > h_grid.back()) {
    if (h >= h_hi) return 0.0;
    return std::max(0.0, tb2_hi_ + tb2_hi_slope_ * (h - h_grid.back())) / t_at(h);
  }
  return std::max(0.0, b2_interp_(h));
}

double EdgeCoefficientTable::inv_b2_segment(std::size_t k, double from, double to) const {
  if (to <= from) return 0.0;
  const double xa = f_h_[k], xb = f_h_[k + 1];
  const bool zero_a = b2_interp_.y()[k] <= 0.0;
  const bool zero_b = b2_interp_.y()[k + 1] <= 0.0;
  const bool ext_a = zero_a && k == 0 && !lo_saddle;
  const bool ext_b = zero_b && k + 2 == f_h_.size() && hi_is_vertex && !hi_saddle;
  auto inv = [this](double hh) {
    const double b = b2_at(hh);
    return b > 0.0 ? 1.0 / b : kInf;
  };
  double total = 0.0;
  double lo = from, hi = to;
  const double mid = 0.5 * (xa + xb);
  // left half near a zero knot
  if (zero_a && lo < mid) {
    const double top = std::min(hi, mid);
    if (ext_a) {
      if (lo <= xa) return kInf;
      // h = xa + e^s
      auto f = [&](double s) { return std::exp(s) * inv(xa + std::exp(s)); };
      total += gauss16(f, std::log(lo - xa), std::log(top - xa));
    } else {
      auto f = [&](double u) { return 2.0 * u * inv(xa + u * u); };
      total += gauss16(f, std::sqrt(std::max(0.0, lo - xa)), std::sqrt(top - xa));
    }
    lo = top;
  }
  if (zero_b && hi > std::max(lo, mid)) {
    const double bot = std::max(lo, mid);
    if (ext_b) {
      if (hi >= xb) return kInf;
      auto f = [&](double s) { return std::exp(s) * inv(xb - std::exp(s)); };
      total += gauss16(f, std::log(xb - hi), std::log(xb - bot));
    } else {
      auto f = [&](double u) { return 2.0 * u * inv(xb - u * u); };
      total += gauss16(f, std::sqrt(std::max(0.0, xb - hi)), std::sqrt(xb - bot));
    }
    hi = bot;
  }
  if (hi > lo) total += gauss16(inv, lo, hi);
  return total;
}

double EdgeCoefficientTable::inv_b2_integral(double h1, double h2) const {
  double a = std::min(h1, h2), b = std::max(h1, h2);
  const double tol = 1e-12 * std::max(1.0, std::abs(b));
  if (a < h_lo - tol || b > h_hi + tol) throw Error(ErrorCode::OutOfSpan, "integral outside the edge span");
  a = std::clamp(a, h_lo, h_hi);
  b = std::clamp(b, h_lo, h_hi);
  if (a == b) return 0.0;
  std::size_t k = static_cast<std::size_t>(std::upper_bound(f_h_.begin(), f_h_.end(), a) - f_h_.begin());
  k = k == 0 ? 0 : k - 1;
  double total = 0.0;
  for (; k + 1 < f_h_.size() && f_h_[k] < b; ++k) {
    total += inv_b2_segment(k, std::max(a, f_h_[k]), std::min(b, f_h_[k + 1]));
    if (std::isinf(total)) return total;
  }
  return total;
}

double EdgeCoefficientTable::f_metric(double h) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(h));
  if (h < h_lo - tol || h > h_hi + tol) throw Error(ErrorCode::OutOfSpan, "F metric outside the edge span");
  h = std::clamp(h, f_h_.front(), f_h_.back());
  std::size_t k = static_cast<std::size_t>(std::upper_bound(f_h_.begin(), f_h_.end(), h) - f_h_.begin());
  if (k == 0) return 0.0;
  --k;
  if (k + 1 >= f_h_.size()) return f_nodes_.back();
  return f_nodes_[k] + f_segment(k, f_h_[k], h);
}

double EdgeCoefficientTable::h_of_f(double f) const {
  if (f <= 0.0) return f_h_.front();
  if (f >= f_nodes_.back()) return f_h_.back();
  const std::size_t k =
      static_cast<std::size_t>(std::upper_bound(f_nodes_.begin(), f_nodes_.end(), f) - f_nodes_.begin()) - 1;
  double lo = f_h_[k], hi = f_h_[k + 1];
  for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f_nodes_[k] + f_segment(k, f_h_[k], mid) < f) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double EdgeCoefficientTable::lipschitz_tb2(double h_from, double h_to) const {
  double lip = 0.0;
  for (std::size_t k = 0; k + 1 < h_grid.size(); ++k) {
    if (h_grid[k] < h_from || h_grid[k + 1] > h_to) continue;
    const double d = (t_values[k + 1] * b2_values[k + 1] - t_values[k] * b2_values[k]) / (h_grid[k + 1] - h_grid[k]);
    lip = std::max(lip, std::abs(d));
  }
  return lip;
}

EdgeCoefficientTable tabulate_edge(const HamiltonianSystem& sys, const ReebGraph& graph, int edge_id,
                                   const TabulateOptions& opt, WorkerPool* pool) {
  const ReebEdge& e = graph.edge(edge_id);
  EdgeCoefficientTable tab;
  tab.edge_id = edge_id;
  tab.h_lo = e.h_lo;
  tab.h_hi = e.h_hi;
  tab.guard = opt.guard;
  tab.lo_is_vertex = true;
  tab.hi_is_vertex = !e.unbounded;
  const CriticalPoint& vlo = graph.vertex(e.v_lo).critical;
  tab.lo_saddle = vlo.kind == CriticalKind::Saddle;
  if (!tab.lo_saddle) tab.t_lo_vertex = 2.0 * std::numbers::pi / std::sqrt(std::abs(sys.hess(vlo.location).det()));
  if (tab.hi_is_vertex) {
    const CriticalPoint& vhi = graph.vertex(e.v_hi).critical;
    tab.hi_saddle = vhi.kind == CriticalKind::Saddle;
    if (!tab.hi_saddle) tab.t_hi_vertex = 2.0 * std::numbers::pi / std::sqrt(std::abs(sys.hess(vhi.location).det()));
  }
  tab.h_grid = coefficient_grid(e.h_lo, e.h_hi, tab.lo_is_vertex, tab.hi_is_vertex, opt);
  const std::size_t n = tab.h_grid.size();
  tab.t_values.assign(n, 0.0);
  tab.b2_values.assign(n, 0.0);
  parallel_for(pool, n, [&](std::size_t k) {
    const LevelCurve c = trace_level_curve(sys, graph, edge_id, tab.h_grid[k], opt.trace);
    const Coeffs cf = compute_coeffs(sys, c);
    tab.t_values[k] = cf.t;
    tab.b2_values[k] = cf.b2;
  });
  auto decade_fit = [&](double hs, bool low_end) {
    std::vector<double> hx, tx;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = std::abs(tab.h_grid[k] - hs);
      if (d <= 10.0 * opt.guard * (1.0 + 1e-9) && ((tab.h_grid[k] > hs) == low_end)) {
        hx.push_back(tab.h_grid[k]);
        tx.push_back(tab.t_values[k]);
      }
    }
    return fit_log_law(hx, tx, hs);
  };
  if (tab.lo_saddle) tab.lo_fit = decade_fit(e.h_lo, true);
  if (tab.hi_saddle) tab.hi_fit = decade_fit(e.h_hi, false);
  tab.finalize();
  return tab;
}

CoefficientTables::CoefficientTables(std::vector<EdgeCoefficientTable> tables) : tables_(std::move(tables)) {
  std::sort(tables_.begin(), tables_.end(),
            [](const EdgeCoefficientTable& a, const EdgeCoefficientTable& b) { return a.edge_id < b.edge_id; });
}

CoefficientTables CoefficientTables::build(const HamiltonianSystem& sys, const ReebGraph& graph,
                                           const TabulateOptions& opt, WorkerPool* pool) {
  std::vector<EdgeCoefficientTable> t;
  for (const auto& e : graph.edges()) t.push_back(tabulate_edge(sys, graph, e.id, opt, pool));
  return CoefficientTables(std::move(t));
}

bool CoefficientTables::covers(int edge_id) const noexcept {
  return std::any_of(tables_.begin(), tables_.end(), [&](const auto& t) { return t.edge_id == edge_id; });
}

const EdgeCoefficientTable& CoefficientTables::table(int edge_id) const {
  for (const auto& t : tables_)
    if (t.edge_id == edge_id) return t;
  throw Error(ErrorCode::UncoveredEdge, "no coefficient table for edge " + std::to_string(edge_id));
}

double CoefficientTables::t_min() const {
  double m = kInf;
  for (const auto& t : tables_) {
    for (double v : t.t_values) m = std::min(m, v);
    if (t.lo_is_vertex && !t.lo_saddle) m = std::min(m, t.t_lo_vertex);
    if (t.hi_is_vertex && !t.hi_saddle) m = std::min(m, t.t_hi_vertex);
  }
  return m;
}

}  // namespace reebldp
