// Acceptance runner: one PASS/FAIL line per criterion.
//   reebldp_acceptance [--criterion N] [--threads T] [--workdir DIR]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "reebldp/action.hpp"
#include "reebldp/averaged_coeffs.hpp"
#include "reebldp/errors.hpp"
#include "reebldp/hamiltonian.hpp"
#include "reebldp/ldp.hpp"
#include "reebldp/reeb_graph.hpp"
#include "reebldp/saddle_chart.hpp"
#include "reebldp_cli/cli.hpp"

using namespace reebldp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Settings {
  unsigned threads = 1;
  fs::path workdir = ".";
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string sci(double v) { return fmt("%.3g", v); }

const std::string kData = REEBLDP_DATA_DIR;

// ---------------------------------------------------------------- 1

Outcome coefficient_oracle(const Settings& s) {
  const auto t0 = Clock::now();
  WorkerPool pool(s.threads);
  const HamiltonianSystem sys = HamiltonianSystem::builtin("harmonic");
  const ReebGraph g = ReebGraph::build(sys);
  const CoefficientTables tables = CoefficientTables::build(sys, g, {}, &pool);
  const double two_pi = 2.0 * std::acos(-1.0);
  double err_t = 0.0, err_b = 0.0;
  const int n = 1000;
  for (int k = 0; k <= n; ++k) {
    const double h = 0.1 + 3.9 * k / n;
    const Coeffs c = tables.lookup(0, h);
    err_t = std::max(err_t, std::abs(c.t - two_pi) / two_pi);
    err_b = std::max(err_b, std::abs(c.b2 - 2.0 * h) / (2.0 * h));
  }
  const double secs = seconds_since(t0);
  const bool pass = err_t <= 1e-5 && err_b <= 1e-5 && secs <= 10.0;
  return {pass, "harmonic T vs 2pi max rel err " + sci(err_t) + ", B2 vs 2h " + sci(err_b) + " (<= 1e-5) on " +
                    std::to_string(n + 1) + " energies in [0.1,4]; " + fmt("%.2f", secs) + " s (<= 10 s)"};
}

// ---------------------------------------------------------------- 2

Outcome reeb_topology(const Settings&) {
  const HamiltonianSystem sys = HamiltonianSystem::builtin("doublewell");
  std::vector<json> docs;
  bool shape = true;
  std::string note;
  for (int n : {256, 512}) {
    const ReebGraph g = ReebGraph::build(sys, ReebBuildOptions{n});
    int ext = 0, inter = 0;
    for (const auto& v : g.vertices()) (v.interior ? inter : ext)++;
    int low = 0, top = 0;
    for (const auto& e : g.edges()) {
      if (!e.unbounded && std::abs(e.h_lo) < 1e-9 && std::abs(e.h_hi - 0.25) < 1e-9) ++low;
      if (e.unbounded && std::abs(e.h_lo - 0.25) < 1e-9 && std::abs(e.h_hi - g.h_max()) < 1e-12) ++top;
    }
    shape = shape && ext == 2 && inter == 1 && g.edges().size() == 3 && low == 2 && top == 1;
    note += "grid " + std::to_string(n) + ": " + std::to_string(ext) + " exterior, " + std::to_string(inter) +
            " interior, " + std::to_string(g.edges().size()) + " edges; ";
    json d = g.to_json();
    d.erase("grid_n");
    docs.push_back(d);
  }
  const bool same = docs[0].dump() == docs[1].dump();
  return {shape && same, note + (same ? "identical" : "different") + " graphs across 256/512"};
}

// ---------------------------------------------------------------- 3

Outcome action_closed_forms(const Settings& s) {
  const auto t0 = Clock::now();
  WorkerPool pool(s.threads);
  const HamiltonianSystem sys = HamiltonianSystem::builtin("harmonic");
  const ReebGraph g = ReebGraph::build(sys);
  const CoefficientTables tables = CoefficientTables::build(sys, g, {}, &pool);
  GraphPath ramp;
  for (int k = 0; k <= 1000; ++k) {
    ramp.times.push_back(k / 1000.0);
    ramp.samples.push_back({0, 1.0 + k / 1000.0, std::nullopt});
  }
  const double ev = evaluate_action(tables, g, ramp).value;
  const double ev_ref = 0.25 * std::log(2.0);
  const MinActionResult r = minimize_action(tables, g, GraphPoint{0, 1.0, std::nullopt}, GraphPoint{0, 2.0, std::nullopt}, 1.0);
  const double min_ref = std::pow(std::sqrt(2.0) - 1.0, 2);
  const double agree = std::abs(r.dp_value - r.shooting_value) / r.shooting_value;
  const double secs = seconds_since(t0);
  const bool pass = std::abs(ev - ev_ref) <= 1e-4 && std::abs(r.s - min_ref) <= 1e-3 && agree <= 1e-3 && secs <= 30.0;
  return {pass, "ramp 1->2 action " + fmt("%.6f", ev) + " vs 1/4 ln 2 = " + fmt("%.6f", ev_ref) +
                    "; minimum " + fmt("%.6f", r.s) + " vs (sqrt2-1)^2 = " + fmt("%.6f", min_ref) + "; DP " +
                    fmt("%.6f", r.dp_value) + " vs shooting " + fmt("%.6f", r.shooting_value) + " (rel " +
                    sci(agree) + "); " + fmt("%.1f", secs) + " s (<= 30 s)"};
}

// ---------------------------------------------------------------- 4

/// Runs the averaging check and returns its serialised report.
std::string averaging_report(unsigned threads, QvEnsemble* keep) {
  WorkerPool pool(threads);
  const HamiltonianSystem sys = HamiltonianSystem::builtin("harmonic");
  const ReebGraph g = ReebGraph::build(sys);
  const CoefficientTables tables = CoefficientTables::build(sys, g, {}, &pool);
  SimulationConfig cfg;
  cfg.epsilon = 0.02;
  cfg.beta = 0.5;
  cfg.horizon = 1.0;
  cfg.dt = 1e-4;
  cfg.x0 = {1.0, 0.0};
  cfg.record_stride = 10;
  const QvEnsemble e = quadratic_variation_ensemble(sys, g, tables, cfg, 200, 2024, &pool);
  std::ostringstream out;
  out << "seed,realized,predicted,ratio\n";
  for (std::size_t i = 0; i < e.runs.size(); ++i) {
    out << i << ',' << cli::format_double(e.runs[i].realized) << ',' << cli::format_double(e.runs[i].predicted)
        << ',' << cli::format_double(e.runs[i].ratio) << '\n';
  }
  out << "mean," << cli::format_double(e.mean_ratio) << ",se," << cli::format_double(e.std_error) << '\n';
  if (keep) *keep = e;
  return out.str();
}

Outcome averaging_check(const Settings& s) {
  const auto t0 = Clock::now();
  QvEnsemble e;
  const std::string text = averaging_report(s.threads, &e);
  std::ofstream(s.workdir / "criterion4.csv") << text;
  const double secs = seconds_since(t0);
  const bool pass = e.mean_ratio >= 0.9 && e.mean_ratio <= 1.1 && secs <= 300.0;
  return {pass, "mean QV ratio over 200 seeds " + fmt("%.4f", e.mean_ratio) + " +- " + fmt("%.4f", e.std_error) +
                    " (in [0.9,1.1]); " + fmt("%.1f", secs) + " s (<= 300 s)"};
}

// ---------------------------------------------------------------- 5

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "reeb_ldp");
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Minimiser ramp h: 1 -> 3 and the tube experiment, both through the CLI.
CliRun rate_fit_run(const Settings& s, unsigned threads) {
  const fs::path ramp = s.workdir / "criterion5_ramp.csv";
  const std::string cfg = kData + "/harmonic.json";
  const CliRun m = cli_run({"action", "minimize", "--config", cfg, "--from", "0:1", "--to", "0:3", "--horizon", "1",
                            "--path-out", ramp.string()});
  if (m.code != 0) return m;
  return cli_run({"ldp", "verify", "--config", cfg, "--path", ramp.string(), "--delta", "0.3", "--epsilons",
                  "0.16,0.09,0.04", "--beta", "0.5", "--samples", "20000,50000,100000", "--dt", "2e-4", "--seed",
                  "5", "--threads", std::to_string(threads)});
}

Outcome rate_fit(const Settings& s) {
  const auto t0 = Clock::now();
  const CliRun r = rate_fit_run(s, s.threads);
  if (r.code != 0) return {false, "command failed: " + r.err};
  std::ofstream(s.workdir / "criterion5.json") << r.out;
  const json doc = json::parse(r.out);
  const double secs = seconds_since(t0);
  std::string ladder;
  for (const auto& lv : doc["per_epsilon"]) {
    ladder += "eps " + fmt("%g", lv["epsilon"].get<double>()) + ": " +
              std::to_string(lv["hits"].get<std::size_t>()) + "/" + std::to_string(lv["samples"].get<std::size_t>()) +
              "; ";
  }
  const double s_ref = doc["s_reference"].get<double>();
  std::string fit = "no rate fit (fewer than 3 levels with hits)";
  bool within = false;
  if (!doc["s_fit"].is_null()) {
    const double sf = doc["s_fit"].get<double>();
    within = std::abs(sf - s_ref) <= 0.35 * s_ref;
    fit = "S_fit " + fmt("%.4f", sf) + " vs tube infimum " + fmt("%.4f", s_ref) + " (+-35%)";
  } else {
    fit += ", tube infimum " + fmt("%.4f", s_ref);
  }
  const bool mono = doc["monotone_decrease"].get<bool>();
  const bool pass = within && mono && secs <= 1800.0;
  return {pass, ladder + fit + "; p_hat " + (mono ? "" : "not ") + "decreasing; " + fmt("%.0f", secs) + " s"};
}

// ---------------------------------------------------------------- 6

CriticalPoint saddle_of(const HamiltonianSystem& sys) {
  for (const auto& c : find_critical_points(sys, sys.box()))
    if (c.kind == CriticalKind::Saddle) return c;
  throw Error(ErrorCode::BadKind, "no saddle");
}

Outcome saddle_transit(const Settings&) {
  const HamiltonianSystem canon = HamiltonianSystem::builtin("canonical_saddle");
  const SaddleChart id = SaddleChart::build(canon, saddle_of(canon), ChartOptions{0.3});
  std::mt19937_64 rng(6);
  double err_id = 0.0;
  {
    std::uniform_real_distribution<double> um(0.0, 0.6), un(-0.3, 0.3);
    int n = 0;
    while (n < 100) {
      const double mu = um(rng), nu = un(rng), g = mu * mu - nu * nu;
      if (!(mu > 0.0 && g > 1e-6 && g < 3 * 0.09)) continue;
      const double ref = 0.5 * (std::asinh(0.3 / std::sqrt(g)) - std::asinh(nu / std::sqrt(g)));
      err_id = std::max(err_id, std::abs(transit_time(id, mu, nu) - ref));
      ++n;
    }
  }
  const HamiltonianSystem dw = HamiltonianSystem::builtin("doublewell");
  const SaddleChart c = SaddleChart::build(dw, saddle_of(dw), ChartOptions{0.2});
  const double l = c.l();
  std::uniform_real_distribution<double> um(0.0, 2.0 * l), un(-l, l);
  double err_ode = 0.0;
  int violations = 0, tested = 0;
  while (tested < 100) {
    const double mu = um(rng), nu = un(rng), g = mu * mu - nu * nu;
    if (!(mu > 0.0 && g > 1e-6 && g < 3.0 * l * l)) continue;
    const double t = transit_time(c, mu, nu);
    err_ode = std::max(err_ode, std::abs(t - flow_exit_time(c, mu, nu)) / t);
    if (t > transit_log_bound(c, g)) ++violations;
    ++tested;
  }
  const bool pass = err_id <= 1e-6 && err_ode <= 1e-4 && violations == 0;
  return {pass, "identity chart vs 1/2[asinh(l/sqrt G) - asinh(nu/sqrt G)] max abs err " + sci(err_id) +
                    " (<= 1e-6); double well (l=" + fmt("%.2f", l) + ") vs ODE exit max rel err " + sci(err_ode) +
                    " (<= 1e-4); log bound violations " + std::to_string(violations) + "/100"};
}

// ---------------------------------------------------------------- 7

Outcome lemma_oracles(const Settings& s) {
  WorkerPool pool(s.threads);
  std::string note;
  bool pass = true;

  BrownianParams p1;  // a=0.4, d=0.1, beta=0.5, kappa=0.05, eps=0.05, T=1
  p1.seed = 7;
  BrownianParams p2;
  p2.which = BrownianCase::II;
  p2.beta = 0.2;
  p2.d = 0.48;
  p2.epsilon = 1e-3;
  p2.kappa = 0.1;
  p2.seed = 7;
  BrownianParams p3;
  p3.which = BrownianCase::III;
  p3.d = 0.1;
  p3.amplitude = 1.5;
  p3.epsilon = 0.05;
  p3.beta = 0.5;
  p3.seed = 7;
  const char* names[] = {"(i)", "(ii)", "(iii)"};
  int idx = 0;
  for (const BrownianParams& p : {p1, p2, p3}) {
    const BrownianReport r = brownian_saddle_oracle(p, &pool);
    pass = pass && r.passed;
    note += std::string(names[idx++]) + " P=" + sci(r.estimate) + " (exact " + sci(r.exact) + ") vs bound " +
            sci(r.bound) + (r.passed ? " ok; " : " BELOW; ");
  }

  const HamiltonianSystem harm = HamiltonianSystem::builtin("harmonic");
  const ReebGraph hg = ReebGraph::build(harm);
  SimulationConfig cfg;
  cfg.epsilon = 0.05;
  cfg.beta = 0.5;
  cfg.horizon = 1.0;
  cfg.dt = 1e-3;
  cfg.x0 = {0.0, 0.0};
  const std::vector<double> ks = {0.1, 0.3, 1.0, 3.0, 10.0, 1000.0};
  const EscapeReport esc = escape_extremum_probe(harm, hg, cfg, ks, 10000, 7, &pool);
  pass = pass && esc.k_star.has_value();
  note += "escape k*=" + (esc.k_star ? fmt("%g", *esc.k_star) : std::string("none")) + " (P=" +
          fmt("%.3f", esc.rows[0].p_hat) + " at k=0.1); ";

  const HamiltonianSystem dw = HamiltonianSystem::builtin("doublewell");
  double worst = INFINITY;
  int minima = 0;
  for (const auto& c : find_critical_points(dw, dw.box())) {
    if (c.kind != CriticalKind::Minimum) continue;
    worst = std::min(worst, positive_drift_margin(dw, c, 0.2));
    ++minima;
  }
  pass = pass && minima == 2 && worst > 0.0;
  note += "drift margin min over " + std::to_string(minima) + " minima " + sci(worst);
  return {pass, note};
}

// ---------------------------------------------------------------- 8

Outcome determinism(const Settings& s) {
  const unsigned other = s.threads == 1 ? 4 : 1;
  const std::string a4 = averaging_report(s.threads, nullptr);
  const std::string b4 = averaging_report(other, nullptr);
  const bool same4 = a4 == b4;

  std::string a5;
  std::ifstream prev(s.workdir / "criterion5.json");
  if (prev) {
    std::stringstream ss;
    ss << prev.rdbuf();
    a5 = ss.str();
  } else {
    a5 = rate_fit_run(s, s.threads).out;
  }
  const CliRun r5 = rate_fit_run(s, other);
  const bool same5 = r5.code == 0 && !a5.empty() && a5 == r5.out;
  return {same4 && same5, std::string("criterion 4 report ") + (same4 ? "identical" : "DIFFERENT") +
                              " for threads " + std::to_string(s.threads) + "/" + std::to_string(other) +
                              "; criterion 5 report " + (same5 ? "identical" : "DIFFERENT")};
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  s.threads = std::max(1u, std::thread::hardware_concurrency());
  int only = 0;
  std::string workdir = ".";
  CLI::App app{"Acceptance criteria"};
  app.add_option("--criterion", only, "Run one criterion (1-8)")->check(CLI::Range(1, 8));
  app.add_option("--threads", s.threads, "Worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--workdir", workdir, "Directory for the criterion outputs");
  CLI11_PARSE(app, argc, argv);
  s.workdir = workdir;
  fs::create_directories(s.workdir);

  const std::vector<std::pair<std::string, std::function<Outcome(const Settings&)>>> criteria = {
      {"coefficient oracle", coefficient_oracle}, {"Reeb topology", reeb_topology},
      {"action closed forms", action_closed_forms}, {"averaging check", averaging_check},
      {"LDP rate fit", rate_fit},                 {"saddle transit", saddle_transit},
      {"lemma oracles", lemma_oracles},           {"determinism", determinism}};

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    Outcome o;
    try {
      o = criteria[i].second(s);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  return all ? 0 : 1;
}
