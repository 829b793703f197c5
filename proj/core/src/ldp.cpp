#include "reebldp/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "reebldp/errors.hpp"
#include "reebldp/rng.hpp"

namespace reebldp {

namespace {

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double phi_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::acos(-1.0)); }

/// Probability that a Brownian bridge with variance rate v from y0 to y1 over
/// dt stays below b; both ends must already be below b.
double bridge_survival(double y0, double y1, double b, double v, double dt) {
  if (y0 >= b || y1 >= b) return 0.0;
  return -std::expm1(-2.0 * (b - y0) * (b - y1) / (v * dt));
}

/// P(Y_T < c, max Y < b) for Y = sqrt(v) W started at y, c < b.
double capped_endpoint(double y, double c, double b, double v, double horizon) {
  if (y >= b) return 0.0;
  const double s = std::sqrt(v * horizon);
  return std::max(0.0, phi_cdf((c - y) / s) - phi_cdf((c - 2.0 * b + y) / s));
}

struct Block {
  double sum = 0.0;
  double sum2 = 0.0;
  double grid = 0.0;
};

constexpr std::size_t kBlock = 4096;

/// Runs `weight(path, normals)` over all paths in fixed blocks and sums the
/// blocks in order.
template <class F>
std::vector<Block> run_blocks(std::size_t paths, WorkerPool* pool, F&& weight) {
  const std::size_t n_blocks = (paths + kBlock - 1) / kBlock;
  std::vector<Block> blocks(n_blocks);
  parallel_for(pool, n_blocks, [&](std::size_t b) {
    Block acc;
    const std::size_t end = std::min(paths, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const auto [w, g] = weight(static_cast<std::uint32_t>(i));
      acc.sum += w;
      acc.sum2 += w * w;
      acc.grid += g;
    }
    blocks[b] = acc;
  });
  return blocks;
}

Block total(const std::vector<Block>& blocks) {
  Block t;
  for (const Block& b : blocks) {
    t.sum += b.sum;
    t.sum2 += b.sum2;
    t.grid += b.grid;
  }
  return t;
}

void mean_and_error(const Block& t, std::size_t n, double& mean, double& se) {
  const double dn = static_cast<double>(n);
  mean = t.sum / dn;
  const double var = std::max(0.0, t.sum2 / dn - mean * mean);
  se = n > 1 ? std::sqrt(var / (dn - 1.0)) : 0.0;
}

/// Barrier b(t) piecewise constant on the grid; end condition Y_T < c.
struct BarrierProblem {
  std::vector<double> grid;      // node times, grid.front() = 0
  std::vector<double> barrier;   // per interval
  double c = 0.0;
  double v = 1.0;                // variance rate of Y
};

std::pair<double, double> barrier_weight(const BarrierProblem& bp, const NormalStream& ns, std::uint32_t path) {
  const std::size_t n = bp.barrier.size();
  double y = 0.0, w = 1.0;
  bool grid_ok = true;
  std::array<double, 2> z{};
  for (std::size_t k = 0; k < n; ++k) {
    if (k % 2 == 0) z = ns.normals2(path, k / 2);
    const double dt = bp.grid[k + 1] - bp.grid[k];
    const double yn = y + std::sqrt(bp.v * dt) * z[k % 2];
    // the barrier of the next interval also binds at the shared node
    const double b_end = k + 1 < n ? std::min(bp.barrier[k], bp.barrier[k + 1]) : bp.barrier[k];
    if (yn >= b_end) grid_ok = false;
    if (w > 0.0) w = yn >= b_end ? 0.0 : w * bridge_survival(y, yn, bp.barrier[k], bp.v, dt);
    y = yn;
  }
  const bool end_ok = y < bp.c;
  return {end_ok ? w : 0.0, end_ok && grid_ok ? 1.0 : 0.0};
}

}  // namespace

Interval wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0.0, 1.0};
  const double dn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / dn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / dn;
  const double centre = (p + z2 / (2.0 * dn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / dn + z2 / (4.0 * dn * dn)) / denom;
  return {hits == 0 ? 0.0 : std::max(0.0, centre - half), hits == n ? 1.0 : std::min(1.0, centre + half)};
}

RateFit fit_rate(std::span<const double> epsilons, std::span<const double> p, std::span<const std::size_t> n,
                 double beta) {
  if (epsilons.size() != p.size() || p.size() != n.size()) throw Error(ErrorCode::InvalidArgument, "size mismatch");
  RateFit fit;
  fit.residuals.assign(p.size(), std::nan(""));
  std::vector<double> xs, ys, ws;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0) || n[i] == 0) continue;
    const double dn = static_cast<double>(n[i]);
    xs.push_back(std::pow(epsilons[i], -beta));
    ys.push_back(-std::log(p[i]));
    ws.push_back(dn * p[i] / std::max(1.0 - p[i], 1.0 / dn));
    idx.push_back(i);
  }
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 3) return fit;
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  const double xm = sx / sw, ym = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - xm) * (xs[i] - xm);
    sxy += ws[i] * (xs[i] - xm) * (ys[i] - ym);
  }
  if (!(sxx > 0.0)) return fit;
  fit.valid = true;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  fit.slope_se = std::sqrt(1.0 / sxx);
  for (std::size_t i = 0; i < xs.size(); ++i) fit.residuals[idx[i]] = ys[i] - fit.intercept - fit.slope * xs[i];
  return fit;
}

bool in_tube(const ReebGraph& graph, const GraphPath& path, const GraphPath& reference, double delta) {
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!(graph.distance(path.samples[k], sample_path(graph, reference, path.times[k])) < delta)) return false;
  }
  for (std::size_t k = 0; k < reference.size(); ++k) {
    if (!(graph.distance(sample_path(graph, path, reference.times[k]), reference.samples[k]) < delta)) return false;
  }
  return true;
}

TubeEstimate estimate_tube(const HamiltonianSystem& sys, const ReebGraph& graph, const CoefficientTables& tables,
                           const TubeExperiment& exp, WorkerPool* pool) {
  if (!(exp.delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "tube radius must be positive");
  if (exp.reference.size() < 2) throw Error(ErrorCode::InvalidArgument, "reference path needs two samples");
  if (exp.epsilons.empty()) throw Error(ErrorCode::InvalidArgument, "empty epsilon ladder");
  for (std::size_t i = 1; i < exp.epsilons.size(); ++i) {
    if (!(exp.epsilons[i] < exp.epsilons[i - 1])) throw Error(ErrorCode::InvalidArgument, "ladder must decrease");
  }
  if (exp.samples.size() != 1 && exp.samples.size() != exp.epsilons.size()) {
    throw Error(ErrorCode::InvalidArgument, "samples must have one entry or one per epsilon");
  }
  const GraphPoint start = graph.project(sys, exp.x0);
  if (graph.distance(start, exp.reference.samples.front()) > 1e-9 * std::max(1.0, std::abs(start.h))) {
    throw Error(ErrorCode::InvalidArgument, "reference does not start at the projection of x0");
  }
  const double horizon = exp.reference.horizon() - exp.reference.times.front();
  const double t_min = tables.t_min();

  TubeEstimate out;
  for (std::size_t e = 0; e < exp.epsilons.size(); ++e) {
    const std::size_t n = exp.samples.size() == 1 ? exp.samples[0] : exp.samples[e];
    SimulationConfig cfg;
    cfg.epsilon = exp.epsilons[e];
    cfg.beta = exp.beta;
    cfg.horizon = horizon;
    cfg.dt = exp.dt;
    cfg.x0 = exp.x0;
    cfg.stream = derive_stream(exp.seed, "ldp.tube", e);
    cfg.record_stride = exp.record_stride;
    cfg.project = true;

    std::vector<std::uint8_t> hit(n, 0), exited(n, 0), checked(n, 0), mismatch(n, 0);
    parallel_for(pool, n, [&](std::size_t i) {
      SimulationConfig c = cfg;
      c.trajectory = static_cast<std::uint32_t>(i);
      const TrajectoryRecord r = simulate(sys, c, &graph, t_min);
      if (r.status == ExitStatus::BoxExit) {
        exited[i] = 1;
        return;
      }
      const bool fast = in_tube(graph, r.graph_path, exp.reference, exp.delta);
      hit[i] = fast ? 1 : 0;
      if (exp.check_every > 0 && i % exp.check_every == 0) {
        checked[i] = 1;
        const bool slow = path_distance(graph, r.graph_path, exp.reference) < exp.delta;
        mismatch[i] = slow != fast ? 1 : 0;
      }
    });

    TubeLevel lv;
    lv.epsilon = cfg.epsilon;
    lv.samples = n;
    lv.dt = effective_dt(cfg, t_min);
    lv.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
    lv.box_exits = static_cast<std::size_t>(std::count(exited.begin(), exited.end(), 1));
    lv.rechecked = static_cast<std::size_t>(std::count(checked.begin(), checked.end(), 1));
    lv.recheck_mismatches = static_cast<std::size_t>(std::count(mismatch.begin(), mismatch.end(), 1));
    lv.p_hat = n ? static_cast<double>(lv.hits) / static_cast<double>(n) : 0.0;
    lv.ci = wilson_interval(lv.hits, n);
    lv.all_misses = lv.hits == 0;
    out.levels.push_back(lv);
  }

  std::vector<double> eps, ps;
  std::vector<std::size_t> ns;
  for (const TubeLevel& lv : out.levels) {
    eps.push_back(lv.epsilon);
    ps.push_back(lv.p_hat);
    ns.push_back(lv.samples);
  }
  out.fit = fit_rate(eps, ps, ns, exp.beta);
  out.monotone_decrease = true;
  for (std::size_t i = 1; i < out.levels.size(); ++i) {
    if (!(out.levels[i].p_hat < out.levels[i - 1].p_hat)) out.monotone_decrease = false;
  }
  return out;
}

EscapeReport escape_extremum_probe(const HamiltonianSystem& sys, const ReebGraph& graph, const SimulationConfig& cfg,
                                   std::span<const double> k_grid, std::size_t samples, std::uint64_t seed,
                                   WorkerPool* pool) {
  const GraphPoint start = graph.project(sys, cfg.x0);
  if (!start.at_vertex || graph.vertex(*start.at_vertex).interior) {
    throw Error(ErrorCode::BadKind, "escape probe must start at an extremum");
  }
  const double h0 = graph.vertex(*start.at_vertex).critical.h_value;
  const bool is_min = graph.vertex(*start.at_vertex).critical.kind == CriticalKind::Minimum;
  const double scale = std::pow(cfg.epsilon, cfg.beta);

  std::vector<double> reach(samples, 0.0);  // max |H - h0| over the run
  parallel_for(pool, samples, [&](std::size_t i) {
    SimulationConfig c = cfg;
    c.stream = derive_stream(seed, "ldp.escape", 0);
    c.trajectory = static_cast<std::uint32_t>(i);
    c.record_stride = 1;
    c.project = false;
    const TrajectoryRecord r = simulate(sys, c);
    double m = 0.0;
    for (double h : r.h_series) m = std::max(m, is_min ? h - h0 : h0 - h);
    if (r.status == ExitStatus::BoxExit) m = std::numeric_limits<double>::infinity();
    reach[i] = m;
  });

  EscapeReport rep;
  rep.samples = samples;
  const double dn = static_cast<double>(samples);
  for (double k : k_grid) {
    EscapeRow row;
    row.k = k;
    row.level = k * scale;
    row.hits = static_cast<std::size_t>(
        std::count_if(reach.begin(), reach.end(), [&](double m) { return m >= row.level; }));
    row.p_hat = samples ? static_cast<double>(row.hits) / dn : 0.0;
    row.std_error = samples ? std::sqrt(row.p_hat * (1.0 - row.p_hat) / dn) : 0.0;
    rep.rows.push_back(row);
  }
  std::vector<EscapeRow> sorted = rep.rows;
  std::sort(sorted.begin(), sorted.end(), [](const EscapeRow& a, const EscapeRow& b) { return a.k < b.k; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const double slack = 2.0 * std::hypot(sorted[i].std_error, sorted[i - 1].std_error);
    if (sorted[i].p_hat > sorted[i - 1].p_hat + slack) rep.monotone = false;
  }
  for (const EscapeRow& r : sorted) {
    if (r.p_hat >= 0.5) {
      rep.k_star = r.k;
      break;
    }
  }
  return rep;
}

BrownianReport brownian_saddle_oracle(const BrownianParams& p, WorkerPool* pool) {
  BrownianReport rep;
  rep.which = p.which;
  if (!(p.epsilon > 0.0 && p.epsilon < 1.0) || !(p.beta > 0.0 && p.beta < 1.0) || !(p.horizon > 0.0) ||
      p.steps < 2 || p.paths == 0) {
    throw Error(ErrorCode::InvalidArgument, "bad Brownian oracle parameters");
  }
  const double eps = p.epsilon, beta = p.beta, L = std::abs(std::log(eps)), T = p.horizon;
  const double v = std::pow(eps, beta);
  BarrierProblem bp;
  bp.v = v;
  auto uniform_grid = [&](double t0, double t1, int m) {
    for (int k = 1; k <= m; ++k) bp.grid.push_back(t0 + (t1 - t0) * k / m);
  };
  bp.grid.push_back(0.0);

  switch (p.which) {
    case BrownianCase::I: {
      rep.admissible = 0.0 < p.d && p.d < p.a && p.a < 0.5;
      const double b = 0.25 * p.a * beta * L * std::pow(eps, p.a * beta);
      bp.c = -4.0 * std::pow(eps, (p.a - p.d) * beta) * (p.a - p.d) * beta * L;
      uniform_grid(0.0, T, p.steps);
      bp.barrier.assign(static_cast<std::size_t>(p.steps), b);
      rep.bound = 2.0 * std::exp(-std::pow(eps, -(1.0 - 2.0 * (p.a - p.d)) * beta - p.kappa));
      rep.exact = capped_endpoint(0.0, bp.c, b, v, T);
      break;
    }
    case BrownianCase::II: {
      const double dmax = std::min((1.0 / beta - 1.0) / 3.0, 0.5);
      const double tau = std::pow(eps, p.d * beta);
      rep.admissible = 0.0 < p.d && p.d < dmax && tau < T;
      const double b1 = std::pow(eps, 0.5 * (1.0 + p.d) * beta);
      const double b2 = -std::pow(eps, 0.5 * (1.0 - p.d) * beta);
      bp.c = -2.0 * (1.0 - p.d) * beta * std::pow(eps, 0.5 * (1.0 - p.d) * beta) * L;
      const int m1 = std::max(1, p.steps / 2);
      if (tau < T) {
        uniform_grid(0.0, tau, m1);
        uniform_grid(tau, T, p.steps - m1);
        bp.barrier.assign(static_cast<std::size_t>(m1), b1);
        bp.barrier.resize(static_cast<std::size_t>(p.steps), b2);
      } else {
        uniform_grid(0.0, T, p.steps);
        bp.barrier.assign(static_cast<std::size_t>(p.steps), b1);
      }
      rep.bound = 2.0 * std::exp(-std::pow(eps, -2.0 * p.d * beta - p.kappa));
      if (tau < T && bp.c < b2) {
        // condition on Y_tau = y < b2, Simpson's rule over y
        const double s1 = std::sqrt(v * tau);
        const double lo = b2 - 40.0 * s1;
        const int m = 20000;
        const double hstep = (b2 - lo) / m;
        double acc = 0.0;
        for (int k = 0; k <= m; ++k) {
          const double y = lo + k * hstep;
          const double dens = (phi_pdf(y / s1) - phi_pdf((y - 2.0 * b1) / s1)) / s1;
          const double wgt = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
          acc += wgt * dens * capped_endpoint(y, bp.c, b2, v, T - tau);
        }
        rep.exact = acc * hstep / 3.0;
      } else {
        rep.exact = 0.0;
      }
      break;
    }
    case BrownianCase::III: {
      rep.admissible = 0.0 < p.d && p.d < 0.5 * (1.0 / beta - 1.0) && p.amplitude >= 0.0;
      const double b = 0.25 * p.d * beta * L * std::pow(eps, p.d * beta);
      bp.c = -p.amplitude;
      uniform_grid(0.0, T, p.steps);
      bp.barrier.assign(static_cast<std::size_t>(p.steps), b);
      rep.bound = 2.0 * std::exp(-(p.amplitude * p.amplitude / T) * std::pow(eps, -beta));
      rep.exact = capped_endpoint(0.0, bp.c, b, v, T);
      break;
    }
  }
  rep.vacuous = rep.bound >= 1.0;

  const NormalStream ns(derive_stream(p.seed, "oracle.brownian", static_cast<std::uint64_t>(p.which)));
  const Block t = total(run_blocks(p.paths, pool, [&](std::uint32_t i) { return barrier_weight(bp, ns, i); }));
  mean_and_error(t, p.paths, rep.estimate, rep.std_error);
  rep.passed = !rep.vacuous && rep.estimate >= rep.bound;
  if (rep.vacuous) {
    rep.note = "bound is at least 1; no probability can exceed it";
  } else if (!rep.admissible) {
    rep.note = "parameters outside the admissible range";
  }
  return rep;
}

ReflectionReport reflection_check(double level, double horizon, std::size_t paths, int steps, std::uint64_t seed,
                                  WorkerPool* pool) {
  if (!(level > 0.0) || !(horizon > 0.0) || steps < 1 || paths == 0) {
    throw Error(ErrorCode::InvalidArgument, "bad reflection check parameters");
  }
  BarrierProblem bp;
  bp.v = 1.0;
  bp.c = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= steps; ++k) bp.grid.push_back(horizon * k / steps);
  bp.barrier.assign(static_cast<std::size_t>(steps), level);
  const NormalStream ns(derive_stream(seed, "oracle.reflection", 0));
  const Block t = total(run_blocks(paths, pool, [&](std::uint32_t i) { return barrier_weight(bp, ns, i); }));
  ReflectionReport rep;
  rep.level = level;
  rep.horizon = horizon;
  double stay = 0.0;
  mean_and_error(t, paths, stay, rep.std_error);
  rep.estimate = 1.0 - stay;
  rep.grid_estimate = 1.0 - t.grid / static_cast<double>(paths);
  rep.closed_form = 2.0 * (1.0 - phi_cdf(level / std::sqrt(horizon)));
  rep.rel_error = std::abs(rep.estimate - rep.closed_form) / rep.closed_form;
  return rep;
}

QvReport quadratic_variation_check(const TrajectoryRecord& record, const CoefficientTables& tables, double epsilon,
                                   double beta) {
  const GraphPath& gp = record.graph_path;
  if (gp.size() != record.times.size() || gp.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "record has no projected path");
  }
  QvReport rep;
  rep.realized = record.qv_series.back();
  double integral = 0.0;
  double prev = tables.lookup(gp.samples[0].edge_id, gp.samples[0].h).b2;
  for (std::size_t k = 1; k < gp.size(); ++k) {
    const double cur = tables.lookup(gp.samples[k].edge_id, gp.samples[k].h).b2;
    integral += 0.5 * (prev + cur) * (gp.times[k] - gp.times[k - 1]);
    prev = cur;
  }
  rep.predicted = std::pow(epsilon, beta) * integral;
  rep.ratio = rep.predicted == 0.0 && rep.realized == 0.0 ? 1.0 : rep.realized / rep.predicted;
  return rep;
}

QvEnsemble quadratic_variation_ensemble(const HamiltonianSystem& sys, const ReebGraph& graph,
                                        const CoefficientTables& tables, const SimulationConfig& cfg,
                                        std::size_t seeds, std::uint64_t seed, WorkerPool* pool) {
  QvEnsemble out;
  out.runs.resize(seeds);
  const double t_min = tables.t_min();
  parallel_for(pool, seeds, [&](std::size_t i) {
    SimulationConfig c = cfg;
    c.stream = derive_stream(seed, "ldp.qv", 0);
    c.trajectory = static_cast<std::uint32_t>(i);
    c.project = true;
    const TrajectoryRecord r = simulate(sys, c, &graph, t_min);
    out.runs[i] = quadratic_variation_check(r, tables, c.epsilon, c.beta);
  });
  double s = 0.0, s2 = 0.0;
  for (const QvReport& r : out.runs) {
    s += r.ratio;
    s2 += r.ratio * r.ratio;
  }
  const double dn = static_cast<double>(seeds);
  if (seeds > 0) {
    out.mean_ratio = s / dn;
    out.std_error = seeds > 1 ? std::sqrt(std::max(0.0, s2 / dn - out.mean_ratio * out.mean_ratio) / (dn - 1.0)) : 0.0;
  }
  return out;
}

}  // namespace reebldp
