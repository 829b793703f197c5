#include "reebldp/saddle_chart.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "reebldp/errors.hpp"
#include "reebldp/ode.hpp"

namespace reebldp {

namespace {

// 8-point Gauss-Legendre on [0, 1]
constexpr std::array<double, 8> kT = {0.019855071751231856, 0.10166676129318664, 0.2372337950418355,
                                      0.4082826787521751,   0.5917173212478249,  0.7627662049581645,
                                      0.8983332387068134,   0.9801449282487681};
constexpr std::array<double, 8> kW = {0.05061426814518813, 0.11119051722668724, 0.15685332293894363,
                                      0.18134189168918100, 0.18134189168918100, 0.15685332293894363,
                                      0.11119051722668724, 0.05061426814518813};

// 16-point Gauss-Legendre on [-1, 1], positive half
constexpr std::array<double, 8> kGx = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                       0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                       0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kGw = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                       0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                       0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t k = 0; k < kGx.size(); ++k) s += kGw[k] * (f(c - r * kGx[k]) + f(c + r * kGx[k]));
  return s * r;
}

template <class F>
double composite_gauss(F&& f, double a, double b, double rel_tol) {
  int panels = std::max(1, static_cast<int>(std::ceil((b - a) / 0.5)));
  auto run = [&](int n) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += gauss16(f, a + (b - a) * k / n, a + (b - a) * (k + 1) / n);
    return s;
  };
  double prev = run(panels);
  for (int it = 0; it < 8; ++it) {
    panels *= 2;
    const double cur = run(panels);
    if (std::abs(cur - prev) <= rel_tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

}  // namespace

bool SaddleChart::raw_chart(Vec2 x, Vec2& mn) const noexcept {
  const Vec2 d = x - center_;
  Mat2 q;
  for (std::size_t k = 0; k < kT.size(); ++k) {
    const Mat2 hs = sys_->hess(center_ + kT[k] * d);
    const double w = kW[k] * (1.0 - kT[k]);
    q.a += w * hs.a;
    q.b += w * hs.b;
    q.c += w * hs.c;
    q.d += w * hs.d;
  }
  const double u = dot(d, e_plus_), v = dot(d, e_minus_);
  const double q11 = dot(e_plus_, q * e_plus_);
  const double q12 = dot(e_plus_, q * e_minus_);
  const double q22 = dot(e_minus_, q * e_minus_);
  if (!(q11 > 0.0)) return false;
  const double disc = q12 * q12 / q11 - q22;
  if (!(disc > 0.0)) return false;
  mn = {std::sqrt(q11) * (u + q12 / q11 * v), std::sqrt(disc) * v};
  if (flipped_) mn.y = -mn.y;
  return true;
}

Vec2 SaddleChart::to_chart(Vec2 x) const {
  Vec2 mn;
  if (!raw_chart(x, mn)) throw Error(ErrorCode::OutsideChart, "point outside the chart domain");
  return mn;
}

Mat2 SaddleChart::jacobian_inverse_map(Vec2 x) const {
  const double hstep = 1e-6 * std::max(1.0, norm(x - center_));
  const Vec2 px = to_chart(x + Vec2{hstep, 0}), mx = to_chart(x - Vec2{hstep, 0});
  const Vec2 py = to_chart(x + Vec2{0, hstep}), my = to_chart(x - Vec2{0, hstep});
  const double s = 0.5 / hstep;
  return {(px.x - mx.x) * s, (py.x - my.x) * s, (px.y - mx.y) * s, (py.y - my.y) * s};
}

Vec2 SaddleChart::from_chart(Vec2 mn) const {
  const double nu = flipped_ ? -mn.y : mn.y;
  Vec2 x = center_ + (mn.x / scale_plus_) * e_plus_ + (nu / scale_minus_) * e_minus_;
  const double tol = 1e-14 * std::max(1.0, norm(mn));
  Vec2 cur;
  if (!raw_chart(x, cur)) throw Error(ErrorCode::OutsideChart, "Newton start outside the chart domain");
  double res = norm(cur - mn);
  for (int it = 0; it < 60 && res > tol; ++it) {
    const Mat2 j = jacobian_inverse_map(x);
    if (!(std::abs(j.det()) > 0.0)) break;
    const Vec2 dx = j.inverse() * (cur - mn);
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      const Vec2 xt = x - step * dx;
      Vec2 ct;
      if (raw_chart(xt, ct) && norm(ct - mn) < res) {
        x = xt;
        cur = ct;
        res = norm(ct - mn);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  if (!(res <= 1e-11 * std::max(1.0, norm(mn)))) {
    std::ostringstream os;
    os << "chart inversion failed at (" << mn.x << ", " << mn.y << "), residual " << res;
    throw Error(ErrorCode::OutsideChart, os.str());
  }
  return x;
}

double SaddleChart::det_jpsi(Vec2 mn) const { return 1.0 / jacobian_inverse_map(from_chart(mn)).det(); }

bool SaddleChart::validate(const ChartOptions& opt) {
  const int n = opt.validation_n;
  max_residual_ = 0.0;
  max_det_ = 0.0;
  double m = 0.0;
  std::vector<double> dets(static_cast<std::size_t>(n * n));
  const double dmu = 8.0 * l_ / (n - 1), dnu = 4.0 * l_ / (n - 1);
  try {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const Vec2 mn{-4.0 * l_ + i * dmu, -2.0 * l_ + j * dnu};
        const Vec2 x = from_chart(mn);
        const double res = std::abs(sys_->h(x) - h0_ - (mn.x * mn.x - mn.y * mn.y));
        max_residual_ = std::max(max_residual_, res);
        const Mat2 jinv = jacobian_inverse_map(x);
        const double det = 1.0 / jinv.det();
        if (!(det > 0.0)) return false;
        dets[static_cast<std::size_t>(i * n + j)] = det;
        max_det_ = std::max(max_det_, det);
        m = std::max({m, norm(x - center_), norm(mn), jinv.op_norm(), jinv.inverse().op_norm(), det});
      }
  } catch (const Error&) {
    return false;
  }
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      const auto at = [&](int a, int b) { return dets[static_cast<std::size_t>(a * n + b)]; };
      const double gx = (at(i + 1, j) - at(i - 1, j)) / (2.0 * dmu);
      const double gy = (at(i, j + 1) - at(i, j - 1)) / (2.0 * dnu);
      m = std::max(m, std::hypot(gx, gy));
    }
  m_bar_ = m;
  return max_residual_ <= opt.residual_tol;
}

SaddleChart SaddleChart::build(const HamiltonianSystem& sys, const CriticalPoint& saddle, const ChartOptions& opt) {
  if (saddle.kind != CriticalKind::Saddle) throw Error(ErrorCode::BadKind, "chart needs a saddle point");
  if (!(opt.l > 0.0 && opt.l < 1.0)) throw Error(ErrorCode::InvalidArgument, "chart size l must lie in (0, 1)");
  SaddleChart c;
  c.sys_ = &sys;
  c.center_ = saddle.location;
  c.h0_ = sys.h(saddle.location);
  const Mat2 hs = sys.hess(saddle.location);
  const SymEigen e = sym_eigen(hs.a, hs.b, hs.d);
  c.e_plus_ = e.v_hi;
  c.e_minus_ = e.v_lo;
  c.scale_plus_ = std::sqrt(0.5 * e.hi);
  c.scale_minus_ = std::sqrt(-0.5 * e.lo);
  c.l_ = opt.l;
  // orientation: make det J_psi positive at the saddle
  c.flipped_ = false;
  if (c.jacobian_inverse_map(c.center_).det() < 0.0) c.flipped_ = true;
  for (int attempt = 0; attempt <= opt.max_shrinks; ++attempt) {
    c.shrinks_ = attempt;
    if (c.validate(opt)) return c;
    c.l_ *= opt.shrink;
  }
  std::ostringstream os;
  os << "chart residual " << c.max_residual_ << " above " << opt.residual_tol << " after " << opt.max_shrinks
     << " shrinks (l=" << c.l_ / opt.shrink << ")";
  throw Error(ErrorCode::ChartFail, os.str());
}

double transit_time(const SaddleChart& chart, double mu, double nu) {
  const double l = chart.l();
  const double g = mu * mu - nu * nu;
  if (!chart.in_u({mu, nu}) || !(mu > 0.0) || !(g > 0.0) || !(g < 3.0 * l * l)) {
    std::ostringstream os;
    os << "(" << mu << ", " << nu << ") outside the transit domain";
    throw Error(ErrorCode::OutsideChart, os.str());
  }
  const double sg = std::sqrt(g);
  const double a = std::asinh(nu / sg), b = std::asinh(l / sg);
  auto integrand = [&](double u) { return chart.det_jpsi({sg * std::cosh(u), sg * std::sinh(u)}); };
  return 0.5 * composite_gauss(integrand, a, b, 1e-12);
}

double flow_exit_time(const SaddleChart& chart, double mu, double nu, double rtol) {
  const HamiltonianSystem& sys = chart.system();
  const Vec2 x0 = chart.from_chart({mu, nu});
  auto rhs = [&sys](double, const ode::State<2>& y) {
    const Vec2 v = sys.flow({y[0], y[1]});
    return ode::State<2>{v.x, v.y};
  };
  auto g = [&](const ode::State<2>& y) { return chart.to_chart({y[0], y[1]}).y - chart.l(); };
  double t_exit = -1.0;
  ode::Options opt;
  opt.rtol = rtol;
  opt.atol = rtol * 1e-2;
  opt.h_init = 1e-4;
  opt.h_max = 0.05;
  auto obs = [&](double t_prev, const ode::State<2>& y_prev, double t, const ode::State<2>& y) {
    const double a = g(y_prev), b = g(y);
    if (a < 0.0 && b >= 0.0) {
      ode::State<2> ye;
      t_exit = t_prev + ode::locate_event<2>(rhs, t_prev, y_prev, t - t_prev, g, a, b, ye);
      return false;
    }
    return chart.in_u0(chart.to_chart({y[0], y[1]}));
  };
  ode::integrate<2>(rhs, 0.0, {x0.x, x0.y}, 1e4, opt, obs);
  if (t_exit < 0.0) throw Error(ErrorCode::OutsideChart, "orbit left the chart before reaching nu = l");
  return t_exit;
}

double transit_log_bound(const SaddleChart& chart, double h) {
  const double l = chart.l();
  return chart.m_bar() * (std::log(l + std::sqrt(l * l + h)) - 0.5 * std::log(h));
}

DerivativeReport transit_derivative_bounds(const SaddleChart& chart, const std::vector<Vec2>& samples) {
  DerivativeReport rep;
  for (const Vec2& s : samples) {
    DerivativeSample d;
    d.mu = s.x;
    d.nu = s.y;
    d.g = s.x * s.x - s.y * s.y;
    const double step = 1e-4 * std::min(std::sqrt(d.g), chart.l());
    d.dt_dmu = (transit_time(chart, s.x + step, s.y) - transit_time(chart, s.x - step, s.y)) / (2.0 * step);
    const double hi = std::min(s.y + step, chart.l());
    d.dt_dnu = (transit_time(chart, s.x, hi) - transit_time(chart, s.x, s.y - step)) / (hi - s.y + step);
    d.c = std::max(std::abs(d.dt_dmu), std::abs(d.dt_dnu)) * d.g;
    rep.c_min = std::max(rep.c_min, d.c);
    rep.samples.push_back(d);
  }
  return rep;
}

}  // namespace reebldp
