#include "reebldp/sde.hpp"

#include <cmath>
#include <sstream>

#include "reebldp/errors.hpp"
#include "reebldp/ode.hpp"

namespace reebldp {

namespace {

void push_record(TrajectoryRecord& r, double t, Vec2 x, double h, double qv, double drift, double mart) {
  r.times.push_back(t);
  r.states.push_back(x);
  r.h_series.push_back(h);
  r.qv_series.push_back(qv);
  r.drift_integral.push_back(drift);
  r.martingale.push_back(mart);
}

TrajectoryRecord run_em(const HamiltonianSystem& sys, double a, double b, double dt, std::size_t n, Vec2 x0,
                        std::uint64_t stream, std::uint32_t trajectory, int stride, const ReebGraph* graph) {
  if (stride < 1) throw Error(ErrorCode::InvalidArgument, "record stride must be positive");
  if (!sys.box().contains(x0)) throw Error(ErrorCode::OutsideBox, "start point outside the working box");
  const NormalStream normals(stream);
  const int l = sys.noise_dim();
  const double sdt = std::sqrt(dt);

  TrajectoryRecord r;
  r.dt = dt;
  const std::size_t n_rec = n / static_cast<std::size_t>(stride) + 2;
  r.times.reserve(n_rec);
  r.states.reserve(n_rec);
  r.h_series.reserve(n_rec);
  r.qv_series.reserve(n_rec);
  r.drift_integral.reserve(n_rec);
  r.martingale.reserve(n_rec);

  std::optional<TrajectoryProjector> proj;
  if (graph) proj.emplace(sys, *graph);
  auto record = [&](double t, Vec2 x, double h, double qv, double drift, double mart) {
    push_record(r, t, x, h, qv, drift, mart);
    if (proj) {
      r.graph_path.times.push_back(t);
      r.graph_path.samples.push_back(proj->push(x));
    }
  };

  Vec2 x = x0;
  FieldSample f = sys.evaluate(x);
  double qv = 0.0, drift = 0.0, mart = 0.0;
  record(0.0, x, f.h, qv, drift, mart);
  std::array<double, kMaxNoiseDim> dw{};
  for (std::size_t k = 0; k < n; ++k) {
    for (int s = 0; 2 * s < l; ++s) {
      const auto z = normals.normals2(trajectory, k, static_cast<std::uint32_t>(s));
      dw[2 * s] = sdt * z[0];
      if (2 * s + 1 < l) dw[2 * s + 1] = sdt * z[1];
    }
    const SigmaValue sg = sys.sigma(x);
    const Vec2 noise = sg.apply(std::span<const double>(dw.data(), static_cast<std::size_t>(l)));
    const Vec2 fl{-f.grad.y, f.grad.x};
    const Vec2 xn = x + (a * dt) * fl + b * noise;
    const double t = static_cast<double>(k + 1) * dt;
    if (!sys.box().contains(xn) || !std::isfinite(xn.x) || !std::isfinite(xn.y)) {
      r.status = ExitStatus::BoxExit;
      r.exit_time = t;
      r.exit_state = xn;
      r.steps = k + 1;
      return r;
    }
    const FieldSample fn = sys.evaluate(xn);
    drift += b * b * f.ah * dt;
    mart += b * dot(f.grad, noise);
    qv += (fn.h - f.h) * (fn.h - f.h);
    x = xn;
    f = fn;
    if ((k + 1) % static_cast<std::size_t>(stride) == 0 || k + 1 == n) record(t, x, f.h, qv, drift, mart);
  }
  r.steps = n;
  return r;
}

}  // namespace

double max_dt(double epsilon, double beta) noexcept { return 0.05 * std::pow(epsilon, 1.0 - beta); }

double effective_dt(const SimulationConfig& cfg, double t_min) {
  if (!(cfg.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(cfg.beta > 0.0 && cfg.beta < 1.0)) throw Error(ErrorCode::InvalidArgument, "beta must lie in (0, 1)");
  if (!(cfg.horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  if (!(cfg.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  const double cap = max_dt(cfg.epsilon, cfg.beta);
  if (cfg.dt > cap) {
    std::ostringstream os;
    os << "dt=" << cfg.dt << " exceeds 0.05 eps^(1-beta) = " << cap;
    throw Error(ErrorCode::StepTooLarge, os.str());
  }
  double dt = cfg.dt;
  if (std::isfinite(t_min)) dt = std::min(dt, 0.02 * std::pow(cfg.epsilon, 1.0 - cfg.beta) * t_min);
  const double n = std::ceil(cfg.horizon / dt * (1.0 - 1e-12));
  return cfg.horizon / n;
}

TrajectoryRecord simulate(const HamiltonianSystem& sys, const SimulationConfig& cfg, const ReebGraph* graph,
                          double t_min) {
  const double dt = effective_dt(cfg, t_min);
  const auto n = static_cast<std::size_t>(std::llround(cfg.horizon / dt));
  const double a = std::pow(cfg.epsilon, cfg.beta - 1.0);
  const double b = std::pow(cfg.epsilon, 0.5 * cfg.beta);
  return run_em(sys, a, b, dt, n, cfg.x0, cfg.stream, cfg.trajectory, cfg.record_stride,
                cfg.project ? graph : nullptr);
}

TrajectoryRecord simulate_original(const HamiltonianSystem& sys, double epsilon, double horizon, double dt, Vec2 x0,
                                   std::uint64_t stream, std::uint32_t trajectory, int record_stride) {
  if (!(epsilon > 0.0 && horizon > 0.0 && dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad parameters");
  const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
  return run_em(sys, 1.0, std::sqrt(epsilon), dt, n, x0, stream, trajectory, record_stride, nullptr);
}

Vec2 em_step(const HamiltonianSystem& sys, Vec2 x, double a, double b, double dt, std::span<const double> dw) {
  return x + (a * dt) * sys.flow(x) + b * sys.sigma(x).apply(dw);
}

TrajectoryRecord integrate_flow(const HamiltonianSystem& sys, Vec2 x0, double horizon, double tol) {
  if (!sys.box().contains(x0)) throw Error(ErrorCode::BoxExit, "start point outside the working box");
  auto rhs = [&sys](double, const ode::State<2>& y) {
    const Vec2 v = sys.flow({y[0], y[1]});
    return ode::State<2>{v.x, v.y};
  };
  TrajectoryRecord r;
  const double h0 = sys.h(x0);
  push_record(r, 0.0, x0, h0, 0.0, 0.0, 0.0);
  if (norm(sys.flow(x0)) == 0.0) {
    push_record(r, horizon, x0, h0, 0.0, 0.0, 0.0);
    return r;
  }
  ode::Options opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  opt.h_init = 1e-3 * horizon;
  bool exited = false;
  double t_exit = 0.0;
  auto obs = [&](double, const ode::State<2>&, double t, const ode::State<2>& y) {
    const Vec2 p{y[0], y[1]};
    if (!sys.box().contains(p)) {
      exited = true;
      t_exit = t;
      return false;
    }
    push_record(r, t, p, sys.h(p), 0.0, 0.0, 0.0);
    return true;
  };
  const auto res = ode::integrate<2>(rhs, 0.0, {x0.x, x0.y}, horizon, opt, obs);
  if (exited) {
    std::ostringstream os;
    os << "flow left the box at t=" << t_exit;
    throw Error(ErrorCode::BoxExit, os.str());
  }
  if (res.status != ode::Status::Completed) throw Error(ErrorCode::NonConvergence, "flow integration failed");
  r.steps = res.steps;
  return r;
}

}  // namespace reebldp
