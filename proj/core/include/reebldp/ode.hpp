#pragma once

// Explicit Runge-Kutta integrators for small autonomous systems:
// Dormand-Prince 5(4) with step-size control and secant event location,
// and classical fixed-step RK4.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace reebldp::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_init = 1e-3;
  double h_min = 1e-14;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

enum class Status { Completed, Stopped, StepUnderflow, StepBudget };

template <std::size_t N>
struct Result {
  Status status = Status::Completed;
  double t = 0.0;
  State<N> y{};
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

template <std::size_t N>
inline State<N> axpy(const State<N>& y, double h, const State<N>& k) {
  State<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h * k[i];
  return r;
}

/// One Dormand-Prince step. Returns the 5th-order solution and writes the
/// embedded error estimate (5th minus 4th order) to `err`.
template <std::size_t N, class Rhs>
State<N> dp45_step(Rhs& f, double t, const State<N>& y, const State<N>& k1, double h,
                   State<N>& err, State<N>& k_end) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  State<N> tmp;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  const State<N> k2 = f(t + c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  const State<N> k3 = f(t + c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  const State<N> k4 = f(t + c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  const State<N> k5 = f(t + c5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
  const State<N> k6 = f(t + h, tmp);
  State<N> y_new;
  for (std::size_t i = 0; i < N; ++i)
    y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  k_end = f(t + h, y_new);
  for (std::size_t i = 0; i < N; ++i)
    err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k_end[i]);
  return y_new;
}

/// Classical RK4 step.
template <std::size_t N, class Rhs>
State<N> rk4_step(Rhs& f, double t, const State<N>& y, double h) {
  const State<N> k1 = f(t, y);
  const State<N> k2 = f(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const State<N> k3 = f(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const State<N> k4 = f(t + h, axpy(y, h, k3));
  State<N> r;
  for (std::size_t i = 0; i < N; ++i) r[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return r;
}

/// Re-integrates from (t, y) over a sub-step `s` with a single DP step.
template <std::size_t N, class Rhs>
State<N> substep(Rhs& f, double t, const State<N>& y, double s) {
  State<N> err, k_end;
  const State<N> k1 = f(t, y);
  return dp45_step<N>(f, t, y, k1, s, err, k_end);
}

/// Finds s in (0, h] with g(y(t+s)) = 0 given a sign change of g over the
/// accepted step [t, t+h]. Each trial point is one fresh DP sub-step from
/// (t, y), so the located state is as accurate as the step itself.
template <std::size_t N, class Rhs, class Event>
double locate_event(Rhs& f, double t, const State<N>& y, double h, Event& g, double g0, double g1,
                    State<N>& y_event, double s_tol = 1e-15) {
  double lo = 0.0, hi = h;
  double glo = g0, ghi = g1;
  double s = h;
  y_event = substep<N>(f, t, y, h);
  for (int it = 0; it < 100 && (hi - lo) > s_tol * std::max(1.0, std::abs(t) + h); ++it) {
    // Illinois-style regula falsi with bisection fallback
    double trial = lo + (hi - lo) * glo / (glo - ghi);
    if (!(trial > lo && trial < hi) || it % 3 == 2) trial = 0.5 * (lo + hi);
    const State<N> yt = substep<N>(f, t, y, trial);
    const double gt = g(yt);
    if (gt == 0.0) {
      y_event = yt;
      return trial;
    }
    if ((gt < 0.0) == (glo < 0.0)) {
      lo = trial;
      glo = gt;
    } else {
      hi = trial;
      ghi = gt;
    }
    s = hi;
  }
  y_event = substep<N>(f, t, y, s);
  return s;
}

/// Adaptive Dormand-Prince driver. After every accepted step the observer is
/// called as `obs(t_prev, y_prev, t, y)`; returning false stops integration
/// (status Stopped) with the state at the last accepted step.
template <std::size_t N, class Rhs, class Observer>
Result<N> integrate(Rhs f, double t0, const State<N>& y0, double t_end, const Options& opt,
                    Observer&& obs) {
  Result<N> res;
  res.t = t0;
  res.y = y0;
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  double h = std::min(std::abs(opt.h_init), std::abs(t_end - t0)) * dir;
  if (h == 0.0) return res;
  State<N> k1 = f(t0, y0);
  State<N> err, k_end;
  double t = t0;
  State<N> y = y0;
  while ((t_end - t) * dir > 0.0) {
    if (res.steps >= opt.max_steps) {
      res.status = Status::StepBudget;
      break;
    }
    if (std::abs(h) > opt.h_max) h = opt.h_max * dir;
    if ((t + h - t_end) * dir > 0.0) h = t_end - t;
    const State<N> y_new = dp45_step<N>(f, t, y, k1, h, err, k_end);
    double en = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      en = std::max(en, std::abs(err[i]) / sc);
    }
    if (!std::isfinite(en)) en = 1e10;
    if (en <= 1.0) {
      const double t_prev = t;
      const State<N> y_prev = y;
      t = (std::abs(t_end - (t + h)) < 1e-15 * std::max(1.0, std::abs(t_end))) ? t_end : t + h;
      y = y_new;
      k1 = k_end;
      ++res.steps;
      res.t = t;
      res.y = y;
      if (!obs(t_prev, y_prev, t, y)) {
        res.status = Status::Stopped;
        return res;
      }
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      ++res.rejected;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
      if (std::abs(h) < opt.h_min) {
        res.status = Status::StepUnderflow;
        return res;
      }
    }
  }
  return res;
}

}  // namespace reebldp::ode
