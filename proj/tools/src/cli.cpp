#include "reebldp_cli/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "reebldp/action.hpp"
#include "reebldp/averaged_coeffs.hpp"
#include "reebldp/digest.hpp"
#include "reebldp/errors.hpp"
#include "reebldp/ldp.hpp"
#include "reebldp/parallel.hpp"
#include "reebldp/rng.hpp"
#include "reebldp/saddle_chart.hpp"
#include "reebldp/sde.hpp"
#include "reebldp/system_config.hpp"

namespace reebldp::cli {

using nlohmann::json;

std::string RunManifest::digest() const {
  const json canon = {{"command", command}, {"seed", seed},     {"system", system},
                      {"options", options}, {"inputs", inputs}, {"version", kToolVersion}};
  Fnv1a h;
  h.add(canon.dump());
  return h.hex();
}

json RunManifest::to_json() const {
  return {{"digest", digest()}, {"command", command},   {"seed", seed},         {"version", kToolVersion},
          {"system", system},   {"options", options},   {"inputs", inputs},     {"outputs", outputs},
          {"wall_clock", wall_clock}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

double parse_number(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) config_error("not a number: '" + std::string(s) + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, char sep = ',') {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(sep, start), s.size());
    out.push_back(parse_number(std::string_view(s).substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

Vec2 parse_point(const std::string& s) {
  const auto v = parse_list(s);
  if (v.size() != 2) config_error("expected x,y but got '" + s + "'");
  return {v[0], v[1]};
}

GraphPoint parse_graph_point(const std::string& s, const ReebGraph& graph) {
  const std::size_t colon = s.find(':');
  if (colon == std::string::npos) config_error("expected edge:h but got '" + s + "'");
  const double e = parse_number(std::string_view(s).substr(0, colon));
  const double h = parse_number(std::string_view(s).substr(colon + 1));
  if (e < 0 || e != std::floor(e) || e >= static_cast<double>(graph.edges().size())) {
    config_error("no edge " + s.substr(0, colon));
  }
  const int id = static_cast<int>(e);
  return {id, h, graph.vertex_at(id, h)};
}

json graph_point_json(const GraphPoint& p) {
  json j = {{"edge_id", p.edge_id}, {"h", p.h}};
  j["vertex"] = p.at_vertex ? json(*p.at_vertex) : json(nullptr);
  return j;
}

/// Non-finite doubles become strings so the document stays valid JSON.
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) config_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  Fnv1a h;
  h.add(ss.str());
  return h.hex();
}

struct Common {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  bool schema = false;
  std::string out;
  std::string manifest;
};

struct Context {
  Common common;
  RunManifest manifest;
  std::optional<HamiltonianSystem> sys;
  std::optional<ReebGraph> graph;
  std::optional<CoefficientTables> tables;
  std::optional<WorkerPool> pool;

  WorkerPool* workers() {
    if (!pool) pool.emplace(common.threads);
    return &*pool;
  }
  const HamiltonianSystem& load(const std::string& config) {
    if (config.empty()) config_error("--config is required");
    sys.emplace(load_system(config));
    manifest.system = system_to_json(*sys);
    return *sys;
  }
  const ReebGraph& build_graph(int grid) {
    graph.emplace(ReebGraph::build(*sys, ReebBuildOptions{grid}));
    return *graph;
  }
  const CoefficientTables& build_tables(int n_interior) {
    TabulateOptions opt;
    opt.n_interior = n_interior;
    tables.emplace(CoefficientTables::build(*sys, *graph, opt, workers()));
    return *tables;
  }
  json manifest_ref() const {
    return {{"digest", manifest.digest()},
            {"command", manifest.command},
            {"seed", manifest.seed},
            {"version", kToolVersion}};
  }
};

// ---------------------------------------------------------------- options

struct SystemOpts {
  std::string config;
  int grid = 512;
};

void add_system_opts(CLI::App* app, SystemOpts& o) {
  app->add_option("--config", o.config, "System JSON document");
  app->add_option("--grid", o.grid, "Reeb graph census grid size")->capture_default_str();
}

struct AnalyzeOpts {
  SystemOpts sys;
  double ring = 10.0;
  double radius = 0.2;
  int crit_grid = 64;
};
struct CoeffsOpts {
  SystemOpts sys;
  int edge = -1;
  int n = 64;
};
struct SimulateOpts {
  SystemOpts sys;
  std::string x0;
  double epsilon = 0.1, beta = 0.5, horizon = 1.0, dt = 1e-4;
  int stride = 1;
  std::uint32_t trajectory = 0;
};
struct EvalOpts {
  SystemOpts sys;
  std::string path;
  int n = 64;
};
struct MinimizeOpts {
  SystemOpts sys;
  std::string from, to, path_out;
  double horizon = 1.0;
  int n_time = 400, n_h = 400, n = 64;
  bool no_dp = false;
};
struct VerifyOpts {
  SystemOpts sys;
  std::string path, epsilons = "0.16,0.09,0.04", samples = "1000", x0;
  double delta = 0.3, beta = 0.5, dt = 1e-4;
  int stride = 10, n = 64, n_time = 400, n_h = 400;
};
struct BrownianOpts {
  std::string which = "i";
  double a = 0.4, d = 0.1, beta = 0.5, kappa = 0.05, epsilon = 0.05, horizon = 1.0, amplitude = 1.0, level = 1.0;
  std::size_t paths = 1'000'000;
  int steps = 256;
};
struct EscapeOpts {
  SystemOpts sys;
  double epsilon = 0.05, beta = 0.5, horizon = 1.0, dt = 1e-3;
  std::string k = "0.1,1,10,1000";
  std::size_t samples = 10000;
  int vertex = -1;
};
struct DriftOpts {
  SystemOpts sys;
  double radius = 0.2;
};
struct TransitOpts {
  SystemOpts sys;
  double l = 0.3;
  int vertex = -1;
  std::string points = "0.05,0.01;0.1,0.02;0.2,-0.05";
};

// ---------------------------------------------------------------- handlers

std::string do_analyze(Context& ctx, const AnalyzeOpts& o) {
  ctx.manifest.options = {{"ring", o.ring}, {"radius", o.radius}, {"critical_grid", o.crit_grid}};
  const HamiltonianSystem& sys = ctx.load(o.sys.config);
  const auto crit = find_critical_points(sys, sys.box(), o.crit_grid);
  const AssumptionReport rep = check_assumptions(sys, sys.box(), o.ring, o.crit_grid);
  json doc;
  doc["manifest"] = ctx.manifest_ref();
  doc["critical_points"] = json::array();
  doc["drift_margins"] = json::array();
  for (const auto& c : crit) {
    doc["critical_points"].push_back({{"x", c.location.x},
                                      {"y", c.location.y},
                                      {"h", c.h_value},
                                      {"kind", std::string(to_string(c.kind))},
                                      {"hess_eigenvalues", {c.hess_eigenvalues[0], c.hess_eigenvalues[1]}}});
    if (c.kind == CriticalKind::Minimum) {
      const double m = positive_drift_margin(sys, c, o.radius);
      doc["drift_margins"].push_back({{"x", c.location.x}, {"y", c.location.y}, {"margin", num(m)}, {"positive", m > 0}});
    }
  }
  doc["assumptions"] = json::array();
  for (const auto& ch : rep.checks) {
    json v = json::object();
    for (const auto& [k, val] : ch.values) v[k] = num(val);
    doc["assumptions"].push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}, {"values", v}});
  }
  doc["all_passed"] = rep.all_passed();
  return doc.dump(2) + "\n";
}

std::string do_graph_export(Context& ctx, const SystemOpts& o) {
  ctx.manifest.options = {{"grid", o.grid}};
  ctx.load(o.config);
  json doc = ctx.build_graph(o.grid).to_json();
  doc["manifest"] = ctx.manifest_ref();
  return doc.dump(2) + "\n";
}

std::string do_coeffs(Context& ctx, const CoeffsOpts& o) {
  ctx.manifest.options = {{"grid", o.sys.grid}, {"edge", o.edge}, {"n", o.n}};
  ctx.load(o.sys.config);
  const ReebGraph& g = ctx.build_graph(o.sys.grid);
  if (o.edge < -1 || o.edge >= static_cast<int>(g.edges().size())) config_error("no edge " + std::to_string(o.edge));
  const CoefficientTables& t = ctx.build_tables(o.n);
  std::ostringstream out;
  out << "# manifest " << ctx.manifest.digest() << "\n";
  out << "edge_id,h,T,B2\n";
  for (const auto& tab : t.all()) {
    if (o.edge >= 0 && tab.edge_id != o.edge) continue;
    for (std::size_t k = 0; k < tab.h_grid.size(); ++k) {
      out << tab.edge_id << ',' << format_double(tab.h_grid[k]) << ',' << format_double(tab.t_values[k]) << ','
          << format_double(tab.b2_values[k]) << '\n';
    }
  }
  return out.str();
}

std::string do_simulate(Context& ctx, const SimulateOpts& o) {
  ctx.manifest.options = {{"grid", o.sys.grid}, {"x0", o.x0},         {"epsilon", o.epsilon},
                          {"beta", o.beta},      {"horizon", o.horizon}, {"dt", o.dt},
                          {"stride", o.stride},  {"trajectory", o.trajectory}};
  const HamiltonianSystem& sys = ctx.load(o.sys.config);
  if (o.x0.empty()) config_error("--x0 is required");
  const ReebGraph& g = ctx.build_graph(o.sys.grid);
  SimulationConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.beta = o.beta;
  cfg.horizon = o.horizon;
  cfg.dt = o.dt;
  cfg.x0 = parse_point(o.x0);
  cfg.record_stride = o.stride;
  cfg.trajectory = o.trajectory;
  cfg.stream = derive_stream(ctx.common.seed, "simulate", 0);
  const TrajectoryRecord r = simulate(sys, cfg, &g);
  std::ostringstream out;
  out << "# manifest " << ctx.manifest.digest() << "\n";
  if (r.status == ExitStatus::BoxExit) out << "# box exit at t=" << format_double(r.exit_time) << "\n";
  out << "t,x,y,h,edge_id,qv\n";
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    out << format_double(r.times[k]) << ',' << format_double(r.states[k].x) << ',' << format_double(r.states[k].y)
        << ',' << format_double(r.h_series[k]) << ',' << r.graph_path.samples[k].edge_id << ','
        << format_double(r.qv_series[k]) << '\n';
  }
  return out.str();
}

GraphPath load_path(Context& ctx, const std::string& file, const ReebGraph& g) {
  if (file.empty()) config_error("--path is required");
  ctx.manifest.inputs["path"] = file_digest(file);
  std::ifstream in(file);
  return read_path_csv(in, g);
}

std::string do_action_eval(Context& ctx, const EvalOpts& o) {
  ctx.manifest.options = {{"grid", o.sys.grid}, {"n", o.n}};
  ctx.load(o.sys.config);
  const ReebGraph& g = ctx.build_graph(o.sys.grid);
  const GraphPath path = load_path(ctx, o.path, g);
  const ActionValue v = evaluate_action(ctx.build_tables(o.n), g, path);
  json doc;
  doc["manifest"] = ctx.manifest_ref();
  doc["value"] = num(v.value);
  doc["finite"] = v.finite();
  doc["vertex_dwell"] = v.vertex_dwell;
  doc["vertex_crossings"] = v.vertex_crossings;
  doc["cells"] = v.breakdown.size();
  return doc.dump(2) + "\n";
}

std::string do_action_minimize(Context& ctx, const MinimizeOpts& o) {
  ctx.manifest.options = {{"grid", o.sys.grid}, {"from", o.from},     {"to", o.to},   {"horizon", o.horizon},
                          {"n_time", o.n_time}, {"n_h", o.n_h},       {"n", o.n},     {"dp", !o.no_dp}};
  ctx.load(o.sys.config);
  if (o.from.empty() || o.to.empty()) config_error("--from and --to are required");
  const ReebGraph& g = ctx.build_graph(o.sys.grid);
  const GraphPoint a = parse_graph_point(o.from, g), b = parse_graph_point(o.to, g);
  MinimizeOptions mo;
  mo.n_time = o.n_time;
  mo.n_h = o.n_h;
  mo.run_dp = !o.no_dp;
  const MinActionResult r = minimize_action(ctx.build_tables(o.n), g, a, b, o.horizon, mo);
  if (!o.path_out.empty()) {
    ctx.manifest.outputs.push_back(o.path_out);
    std::ofstream f(o.path_out);
    if (!f) config_error("cannot write " + o.path_out);
    write_path_csv(f, r.path, ctx.manifest.digest());
  }
  json doc;
  doc["manifest"] = ctx.manifest_ref();
  doc["s"] = num(r.s);
  doc["action"] = num(r.action.value);
  doc["dp_value"] = num(r.dp_value);
  doc["shooting_value"] = num(r.shooting_value);
  doc["lagrange_energy"] = num(r.lagrange_energy);
  doc["from"] = graph_point_json(a);
  doc["to"] = graph_point_json(b);
  doc["method"] = r.method;
  doc["dp_nodes"] = r.dp_nodes;
  doc["route"] = json::array();
  for (const auto& leg : r.route) {
    doc["route"].push_back(
        {{"edge_id", leg.edge_id}, {"h_from", leg.h_from}, {"h_to", leg.h_to}, {"f_length", num(leg.f_length)}});
  }
  doc["path_out"] = o.path_out.empty() ? json(nullptr) : json(o.path_out);
  return doc.dump(2) + "\n";
}

Vec2 start_point(const HamiltonianSystem& sys, const ReebGraph& g, const GraphPoint& p) {
  if (p.at_vertex) return g.vertex(*p.at_vertex).critical.location;
  return g.seed_point(sys, p.edge_id, p.h);
}

std::string do_ldp_verify(Context& ctx, const VerifyOpts& o) {
  ctx.manifest.options = {{"grid", o.sys.grid}, {"epsilons", o.epsilons}, {"samples", o.samples},
                          {"x0", o.x0},         {"delta", o.delta},       {"beta", o.beta},
                          {"dt", o.dt},         {"stride", o.stride},     {"n", o.n},
                          {"n_time", o.n_time}, {"n_h", o.n_h}};
  const HamiltonianSystem& sys = ctx.load(o.sys.config);
  const ReebGraph& g = ctx.build_graph(o.sys.grid);
  const GraphPath ref = load_path(ctx, o.path, g);
  const CoefficientTables& tables = ctx.build_tables(o.n);

  TubeExperiment exp;
  exp.reference = ref;
  exp.delta = o.delta;
  exp.epsilons = parse_list(o.epsilons);
  exp.beta = o.beta;
  for (double s : parse_list(o.samples)) {
    if (s < 1 || s != std::floor(s)) config_error("bad sample count");
    exp.samples.push_back(static_cast<std::size_t>(s));
  }
  exp.seed = ctx.common.seed;
  exp.x0 = o.x0.empty() ? start_point(sys, g, ref.samples.front()) : parse_point(o.x0);
  exp.dt = o.dt;
  exp.record_stride = o.stride;
  const TubeEstimate est = estimate_tube(sys, g, tables, exp, ctx.workers());

  MinimizeOptions mo;
  mo.n_time = o.n_time;
  mo.n_h = o.n_h;
  mo.tube = Tube{ref, o.delta};
  mo.free_end = true;
  const MinActionResult inf =
      minimize_action(tables, g, ref.samples.front(), ref.samples.back(), ref.horizon() - ref.times.front(), mo);

  json doc;
  doc["manifest"] = ctx.manifest_ref();
  doc["x0"] = {exp.x0.x, exp.x0.y};
  doc["per_epsilon"] = json::array();
  json warnings = json::array();
  for (const TubeLevel& lv : est.levels) {
    doc["per_epsilon"].push_back({{"epsilon", lv.epsilon},
                                  {"samples", lv.samples},
                                  {"hits", lv.hits},
                                  {"p_hat", lv.p_hat},
                                  {"ci_lo", lv.ci.lo},
                                  {"ci_hi", lv.ci.hi},
                                  {"box_exits", lv.box_exits},
                                  {"all_misses", lv.all_misses},
                                  {"dt", lv.dt},
                                  {"rechecked", lv.rechecked},
                                  {"recheck_mismatches", lv.recheck_mismatches}});
    if (lv.all_misses) warnings.push_back("AllMisses at epsilon " + format_double(lv.epsilon));
  }
  doc["s_reference"] = num(inf.s);
  std::string verdict = "inconclusive";
  if (est.fit.valid) {
    doc["s_fit"] = est.fit.slope;
    doc["s_fit_se"] = est.fit.slope_se;
    doc["intercept"] = est.fit.intercept;
    const double rel = std::abs(est.fit.slope - inf.s) / inf.s;
    doc["relative_error"] = num(rel);
    verdict = rel <= 0.35 && est.monotone_decrease ? "pass" : "fail";
  } else {
    doc["s_fit"] = nullptr;
    warnings.push_back("fewer than 3 ladder points with hits; no rate fit");
  }
  doc["fit_points"] = est.fit.points;
  doc["monotone_decrease"] = est.monotone_decrease;
  if (!est.monotone_decrease) warnings.push_back("p_hat does not decrease along the ladder");
  doc["verdict"] = verdict;
  doc["warnings"] = warnings;
  return doc.dump(2) + "\n";
}

std::string do_oracle_brownian(Context& ctx, const BrownianOpts& o) {
  ctx.manifest.options = {{"case", o.which},   {"a", o.a},           {"d", o.d},
                          {"beta", o.beta},    {"kappa", o.kappa},   {"epsilon", o.epsilon},
                          {"horizon", o.horizon}, {"amplitude", o.amplitude}, {"level", o.level},
                          {"paths", o.paths},  {"steps", o.steps}};
  json doc;
  doc["manifest"] = ctx.manifest_ref();
  if (o.which == "reflection") {
    const ReflectionReport r = reflection_check(o.level, o.horizon, o.paths, o.steps, ctx.common.seed, ctx.workers());
    doc["case"] = "reflection";
    doc["estimate"] = r.estimate;
    doc["std_error"] = r.std_error;
    doc["grid_estimate"] = r.grid_estimate;
    doc["closed_form"] = r.closed_form;
    doc["rel_error"] = r.rel_error;
    doc["passed"] = r.rel_error <= 1e-2;
    return doc.dump(2) + "\n";
  }
  BrownianParams p;
  if (o.which == "i") {
    p.which = BrownianCase::I;
  } else if (o.which == "ii") {
    p.which = BrownianCase::II;
  } else if (o.which == "iii") {
    p.which = BrownianCase::III;
  } else {
    config_error("--case must be i, ii, iii or reflection");
  }
  p.a = o.a;
  p.d = o.d;
  p.beta = o.beta;
  p.kappa = o.kappa;
  p.epsilon = o.epsilon;
  p.horizon = o.horizon;
  p.amplitude = o.amplitude;
  p.paths = o.paths;
  p.steps = o.steps;
  p.seed = ctx.common.seed;
  const BrownianReport r = brownian_saddle_oracle(p, ctx.workers());
  doc["case"] = o.which;
  doc["admissible"] = r.admissible;
  doc["bound"] = r.bound;
  doc["vacuous"] = r.vacuous;
  doc["estimate"] = r.estimate;
  doc["std_error"] = r.std_error;
  doc["exact"] = r.exact;
  doc["passed"] = r.passed;
  doc["note"] = r.note;
  return doc.dump(2) + "\n";
}

int pick_vertex(const ReebGraph& g, int requested, bool interior) {
  if (requested >= 0) {
    if (requested >= static_cast<int>(g.vertices().size())) config_error("no vertex " + std::to_string(requested));
    return requested;
  }
  for (const auto& v : g.vertices()) {
    if (v.interior == interior) return v.id;
  }
  config_error(interior ? "system has no saddle" : "system has no extremum");
}

std::string do_oracle_escape(Context& ctx, const EscapeOpts& o) {
  ctx.manifest.options = {{"grid", o.sys.grid}, {"epsilon", o.epsilon}, {"beta", o.beta},     {"horizon", o.horizon},
                          {"dt", o.dt},         {"k", o.k},             {"samples", o.samples}, {"vertex", o.vertex}};
  const HamiltonianSystem& sys = ctx.load(o.sys.config);
  const ReebGraph& g = ctx.build_graph(o.sys.grid);
  const int v = pick_vertex(g, o.vertex, false);
  SimulationConfig cfg;
  cfg.epsilon = o.epsilon;
  cfg.beta = o.beta;
  cfg.horizon = o.horizon;
  cfg.dt = o.dt;
  cfg.x0 = g.vertex(v).critical.location;
  const auto ks = parse_list(o.k);
  const EscapeReport r = escape_extremum_probe(sys, g, cfg, ks, o.samples, ctx.common.seed, ctx.workers());
  json doc;
  doc["manifest"] = ctx.manifest_ref();
  doc["vertex"] = v;
  doc["samples"] = r.samples;
  doc["rows"] = json::array();
  for (const auto& row : r.rows) {
    doc["rows"].push_back({{"k", row.k},
                           {"level", row.level},
                           {"hits", row.hits},
                           {"p_hat", row.p_hat},
                           {"std_error", row.std_error}});
  }
  doc["k_star"] = r.k_star ? json(*r.k_star) : json(nullptr);
  doc["monotone"] = r.monotone;
  return doc.dump(2) + "\n";
}

std::string do_oracle_drift(Context& ctx, const DriftOpts& o) {
  ctx.manifest.options = {{"radius", o.radius}};
  const HamiltonianSystem& sys = ctx.load(o.sys.config);
  json doc;
  doc["manifest"] = ctx.manifest_ref();
  doc["minima"] = json::array();
  bool all = true;
  for (const auto& c : find_critical_points(sys, sys.box())) {
    if (c.kind != CriticalKind::Minimum) continue;
    const double m = positive_drift_margin(sys, c, o.radius);
    all = all && m > 0;
    doc["minima"].push_back({{"x", c.location.x}, {"y", c.location.y}, {"margin", num(m)}, {"positive", m > 0}});
  }
  doc["all_positive"] = all;
  return doc.dump(2) + "\n";
}

std::string do_oracle_transit(Context& ctx, const TransitOpts& o) {
  ctx.manifest.options = {{"grid", o.sys.grid}, {"l", o.l}, {"vertex", o.vertex}, {"points", o.points}};
  const HamiltonianSystem& sys = ctx.load(o.sys.config);
  const ReebGraph& g = ctx.build_graph(o.sys.grid);
  const int v = pick_vertex(g, o.vertex, true);
  ChartOptions co;
  co.l = o.l;
  const SaddleChart chart = SaddleChart::build(sys, g.vertex(v).critical, co);
  json doc;
  doc["manifest"] = ctx.manifest_ref();
  doc["chart"] = {{"vertex", v},
                  {"l", chart.l()},
                  {"shrinks", chart.shrinks()},
                  {"m_bar", chart.m_bar()},
                  {"max_residual", chart.max_residual()}};
  doc["samples"] = json::array();
  std::size_t start = 0;
  while (start < o.points.size()) {
    const std::size_t end = std::min(o.points.find(';', start), o.points.size());
    const Vec2 mn = parse_point(o.points.substr(start, end - start));
    start = end + 1;
    const double t = transit_time(chart, mn.x, mn.y);
    const double ode = flow_exit_time(chart, mn.x, mn.y);
    const double gval = mn.x * mn.x - mn.y * mn.y;
    const double bound = transit_log_bound(chart, gval);
    doc["samples"].push_back({{"mu", mn.x},
                              {"nu", mn.y},
                              {"transit", t},
                              {"ode_exit", ode},
                              {"rel_diff", std::abs(t - ode) / ode},
                              {"log_bound", num(bound)},
                              {"within_bound", t <= bound}});
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- schemas

json obj(json props, json required = json::array()) {
  return {{"type", "object"}, {"properties", std::move(props)}, {"required", std::move(required)}};
}

const json kNum = {{"type", {"number", "string"}}};
const json kInt = {{"type", "integer"}};
const json kBool = {{"type", "boolean"}};
const json kStr = {{"type", "string"}};

json manifest_schema() {
  return obj({{"digest", kStr}, {"command", kStr}, {"seed", kInt}, {"version", kStr}},
             {"digest", "command", "seed", "version"});
}

json csv_schema(const std::vector<std::string>& columns) {
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "CSV"},
          {"description", "First line '# manifest <digest>', then a header row"},
          {"x-format", "csv"},
          {"x-columns", columns}};
}

json with_meta(json s, const std::string& title) {
  s["$schema"] = "https://json-schema.org/draft/2020-12/schema";
  s["title"] = title;
  s["properties"]["manifest"] = manifest_schema();
  s["required"].push_back("manifest");
  return s;
}

}  // namespace

json output_schema(std::string_view command) {
  if (command == "analyze") {
    const json cp = obj({{"x", kNum}, {"y", kNum}, {"h", kNum}, {"kind", kStr}, {"hess_eigenvalues", {{"type", "array"}}}});
    return with_meta(obj({{"critical_points", {{"type", "array"}, {"items", cp}}},
                          {"assumptions", {{"type", "array"}}},
                          {"drift_margins", {{"type", "array"}}},
                          {"all_passed", kBool}},
                         {"critical_points", "assumptions"}),
                     "analyze");
  }
  if (command == "graph export") {
    return with_meta(obj({{"vertices", {{"type", "array"}}}, {"edges", {{"type", "array"}}}, {"h_max", kNum},
                          {"grid_n", kInt}},
                         {"vertices", "edges"}),
                     "graph export");
  }
  if (command == "coeffs") return csv_schema({"edge_id", "h", "T", "B2"});
  if (command == "simulate") return csv_schema({"t", "x", "y", "h", "edge_id", "qv"});
  if (command == "action eval") {
    return with_meta(obj({{"value", kNum}, {"finite", kBool}, {"vertex_dwell", kNum}, {"vertex_crossings", kInt},
                          {"cells", kInt}},
                         {"value"}),
                     "action eval");
  }
  if (command == "action minimize") {
    return with_meta(obj({{"s", kNum}, {"action", kNum}, {"dp_value", kNum}, {"shooting_value", kNum},
                          {"lagrange_energy", kNum}, {"method", kStr}, {"dp_nodes", kInt},
                          {"route", {{"type", "array"}}}, {"path_out", {{"type", {"string", "null"}}}}},
                         {"s", "route"}),
                     "action minimize");
  }
  if (command == "ldp verify") {
    const json level = obj({{"epsilon", kNum}, {"samples", kInt}, {"hits", kInt}, {"p_hat", kNum}, {"ci_lo", kNum},
                            {"ci_hi", kNum}, {"box_exits", kInt}, {"all_misses", kBool}, {"dt", kNum},
                            {"rechecked", kInt}, {"recheck_mismatches", kInt}});
    return with_meta(obj({{"per_epsilon", {{"type", "array"}, {"items", level}}},
                          {"s_fit", {{"type", {"number", "null"}}}},
                          {"s_reference", kNum},
                          {"verdict", {{"enum", {"pass", "fail", "inconclusive"}}}},
                          {"warnings", {{"type", "array"}}}},
                         {"per_epsilon", "s_fit", "s_reference", "verdict"}),
                     "ldp verify");
  }
  if (command == "oracle brownian") {
    return with_meta(obj({{"case", kStr}, {"bound", kNum}, {"estimate", kNum}, {"std_error", kNum}, {"exact", kNum},
                          {"closed_form", kNum}, {"passed", kBool}},
                         {"case", "estimate", "passed"}),
                     "oracle brownian");
  }
  if (command == "oracle escape") {
    return with_meta(obj({{"rows", {{"type", "array"}}}, {"k_star", {{"type", {"number", "null"}}}},
                          {"monotone", kBool}, {"samples", kInt}},
                         {"rows", "k_star"}),
                     "oracle escape");
  }
  if (command == "oracle drift") {
    return with_meta(obj({{"minima", {{"type", "array"}}}, {"all_positive", kBool}}, {"minima"}), "oracle drift");
  }
  if (command == "oracle transit") {
    return with_meta(obj({{"chart", {{"type", "object"}}}, {"samples", {{"type", "array"}}}}, {"samples"}),
                     "oracle transit");
  }
  throw Error(ErrorCode::ConfigError, "unknown command '" + std::string(command) + "'");
}

GraphPath read_path_csv(std::istream& in, const ReebGraph& graph) {
  if (!in) config_error("cannot read path file");
  GraphPath p;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "t,edge_id,h") config_error("path header must be t,edge_id,h");
      header = true;
      continue;
    }
    const auto v = parse_list(line);
    if (v.size() != 3) config_error("path row needs 3 fields: " + line);
    if (v[1] < 0 || v[1] != std::floor(v[1]) || v[1] >= static_cast<double>(graph.edges().size())) {
      config_error("bad edge id in path row: " + line);
    }
    const int e = static_cast<int>(v[1]);
    if (!p.times.empty() && !(v[0] > p.times.back())) config_error("path times must increase");
    p.times.push_back(v[0]);
    p.samples.push_back({e, v[2], graph.vertex_at(e, v[2])});
  }
  if (p.size() < 2) config_error("path needs at least two rows");
  return p;
}

void write_path_csv(std::ostream& out, const GraphPath& path, const std::string& digest) {
  out << "# manifest " << digest << "\n";
  out << "t,edge_id,h\n";
  for (std::size_t k = 0; k < path.size(); ++k) {
    out << format_double(path.times[k]) << ',' << path.samples[k].edge_id << ',' << format_double(path.samples[k].h)
        << '\n';
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Context ctx;
  Common& common = ctx.common;
  common.threads = WorkerPool::threads_from_env();

  CLI::App app{"Reeb graph averaging and large deviations toolkit", "reeb_ldp"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--seed", common.seed, "Base seed of every random stream")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (default REEB_LDP_THREADS or 1)")
      ->check(CLI::Range(1u, 1024u));
  app.add_flag("--schema", common.schema, "Print the JSON Schema of the output and exit");
  app.add_option("--out", common.out, "Write the result here instead of stdout");
  app.add_option("--manifest", common.manifest, "Write the run manifest (with wall-clock) here");

  AnalyzeOpts analyze;
  auto* a_cmd = app.add_subcommand("analyze", "Critical points, assumption report and drift margins");
  add_system_opts(a_cmd, analyze.sys);
  a_cmd->add_option("--ring", analyze.ring, "Ring radius for the growth checks")->capture_default_str();
  a_cmd->add_option("--radius", analyze.radius, "Ball radius for the drift margin")->capture_default_str();
  a_cmd->add_option("--critical-grid", analyze.crit_grid, "Seed grid for critical points")->capture_default_str();

  SystemOpts graph_opts;
  auto* g_cmd = app.add_subcommand("graph", "Reeb graph");
  g_cmd->require_subcommand(1);
  add_system_opts(g_cmd, graph_opts);
  g_cmd->add_subcommand("export", "Vertices and edges as JSON")->fallthrough();

  CoeffsOpts coeffs;
  auto* c_cmd = app.add_subcommand("coeffs", "Tabulated rotation time T and averaged B2 per edge (CSV)");
  add_system_opts(c_cmd, coeffs.sys);
  c_cmd->add_option("--edge", coeffs.edge, "Edge id (default all)");
  c_cmd->add_option("--n", coeffs.n, "Interior grid points per edge")->capture_default_str();

  SimulateOpts sim;
  auto* s_cmd = app.add_subcommand("simulate", "Euler-Maruyama trajectory of the rescaled equation (CSV)");
  add_system_opts(s_cmd, sim.sys);
  s_cmd->add_option("--x0", sim.x0, "Start point x,y");
  s_cmd->add_option("--epsilon", sim.epsilon)->capture_default_str();
  s_cmd->add_option("--beta", sim.beta)->capture_default_str();
  s_cmd->add_option("--horizon", sim.horizon)->capture_default_str();
  s_cmd->add_option("--dt", sim.dt)->capture_default_str();
  s_cmd->add_option("--stride", sim.stride, "Record every n-th step")->capture_default_str();
  s_cmd->add_option("--trajectory", sim.trajectory, "Trajectory index within the stream")->capture_default_str();

  EvalOpts eval;
  MinimizeOpts mini;
  auto* act = app.add_subcommand("action", "Action functional");
  act->require_subcommand(1);
  auto* ev = act->add_subcommand("eval", "Action of a path CSV (t,edge_id,h)");
  add_system_opts(ev, eval.sys);
  ev->add_option("--path", eval.path, "Path CSV");
  ev->add_option("--n", eval.n, "Interior coefficient grid points per edge")->capture_default_str();
  auto* mn = act->add_subcommand("minimize", "Minimal action between two graph points");
  add_system_opts(mn, mini.sys);
  mn->add_option("--from", mini.from, "Start edge:h");
  mn->add_option("--to", mini.to, "End edge:h");
  mn->add_option("--horizon", mini.horizon)->capture_default_str();
  mn->add_option("--n-time", mini.n_time, "DP time steps")->capture_default_str();
  mn->add_option("--n-h", mini.n_h, "DP energy steps")->capture_default_str();
  mn->add_option("--n", mini.n, "Interior coefficient grid points per edge")->capture_default_str();
  mn->add_flag("--no-dp", mini.no_dp, "Shooting only");
  mn->add_option("--path-out", mini.path_out, "Write the minimizer as a path CSV");

  VerifyOpts ver;
  auto* ldp = app.add_subcommand("ldp", "Large deviation checks");
  ldp->require_subcommand(1);
  auto* vf = ldp->add_subcommand("verify", "Tube probabilities along an epsilon ladder and the rate fit");
  add_system_opts(vf, ver.sys);
  vf->add_option("--path", ver.path, "Reference path CSV");
  vf->add_option("--delta", ver.delta, "Tube radius")->capture_default_str();
  vf->add_option("--epsilons", ver.epsilons, "Decreasing ladder")->capture_default_str();
  vf->add_option("--beta", ver.beta)->capture_default_str();
  vf->add_option("--samples", ver.samples, "Samples, one value or one per epsilon")->capture_default_str();
  vf->add_option("--x0", ver.x0, "Start point x,y (default: a point over the path start)");
  vf->add_option("--dt", ver.dt)->capture_default_str();
  vf->add_option("--stride", ver.stride, "Record stride of the simulated paths")->capture_default_str();
  vf->add_option("--n", ver.n, "Interior coefficient grid points per edge")->capture_default_str();
  vf->add_option("--n-time", ver.n_time, "DP time steps for the tube infimum")->capture_default_str();
  vf->add_option("--n-h", ver.n_h, "DP energy steps for the tube infimum")->capture_default_str();

  BrownianOpts br;
  EscapeOpts esc;
  DriftOpts dr;
  TransitOpts tr;
  auto* orc = app.add_subcommand("oracle", "Lemma oracles");
  orc->require_subcommand(1);
  auto* ob = orc->add_subcommand("brownian", "Barrier events of a scaled Brownian motion");
  ob->add_option("--case", br.which, "i, ii, iii or reflection")->capture_default_str();
  ob->add_option("--a", br.a)->capture_default_str();
  ob->add_option("--d", br.d)->capture_default_str();
  ob->add_option("--beta", br.beta)->capture_default_str();
  ob->add_option("--kappa", br.kappa)->capture_default_str();
  ob->add_option("--epsilon", br.epsilon)->capture_default_str();
  ob->add_option("--horizon", br.horizon)->capture_default_str();
  ob->add_option("--amplitude", br.amplitude, "A of case iii")->capture_default_str();
  ob->add_option("--level", br.level, "Barrier of the reflection check")->capture_default_str();
  ob->add_option("--paths", br.paths)->capture_default_str();
  ob->add_option("--steps", br.steps)->capture_default_str();
  auto* oe = orc->add_subcommand("escape", "Escape from an extremum: P(tau_1 < T) per k");
  add_system_opts(oe, esc.sys);
  oe->add_option("--epsilon", esc.epsilon)->capture_default_str();
  oe->add_option("--beta", esc.beta)->capture_default_str();
  oe->add_option("--horizon", esc.horizon)->capture_default_str();
  oe->add_option("--dt", esc.dt)->capture_default_str();
  oe->add_option("--k", esc.k, "Comma-separated k values")->capture_default_str();
  oe->add_option("--samples", esc.samples)->capture_default_str();
  oe->add_option("--vertex", esc.vertex, "Extremum vertex id (default first)");
  auto* od = orc->add_subcommand("drift", "Positive drift margin at every minimum");
  add_system_opts(od, dr.sys);
  od->add_option("--radius", dr.radius)->capture_default_str();
  auto* ot = orc->add_subcommand("transit", "Saddle transit time in the chart against the flow");
  add_system_opts(ot, tr.sys);
  ot->add_option("--l", tr.l, "Chart size")->capture_default_str();
  ot->add_option("--vertex", tr.vertex, "Saddle vertex id (default first)");
  ot->add_option("--points", tr.points, "mu,nu pairs separated by ';'")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  std::string command;
  const CLI::App* leaf = &app;
  while (!leaf->get_subcommands().empty()) {
    leaf = leaf->get_subcommands().front();
    command += (command.empty() ? "" : " ") + leaf->get_name();
  }
  ctx.manifest.command = command;
  ctx.manifest.seed = common.seed;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::string text;
    if (common.schema) {
      text = output_schema(command).dump(2) + "\n";
    } else if (command == "analyze") {
      text = do_analyze(ctx, analyze);
    } else if (command == "graph export") {
      text = do_graph_export(ctx, graph_opts);
    } else if (command == "coeffs") {
      text = do_coeffs(ctx, coeffs);
    } else if (command == "simulate") {
      text = do_simulate(ctx, sim);
    } else if (command == "action eval") {
      text = do_action_eval(ctx, eval);
    } else if (command == "action minimize") {
      text = do_action_minimize(ctx, mini);
    } else if (command == "ldp verify") {
      text = do_ldp_verify(ctx, ver);
    } else if (command == "oracle brownian") {
      text = do_oracle_brownian(ctx, br);
    } else if (command == "oracle escape") {
      text = do_oracle_escape(ctx, esc);
    } else if (command == "oracle drift") {
      text = do_oracle_drift(ctx, dr);
    } else if (command == "oracle transit") {
      text = do_oracle_transit(ctx, tr);
    } else {
      config_error("incomplete command '" + command + "'");
    }

    if (common.out.empty()) {
      out << text;
      ctx.manifest.outputs.insert(ctx.manifest.outputs.begin(), "-");
    } else {
      std::ofstream f(common.out, std::ios::binary);
      if (!f) config_error("cannot write " + common.out);
      f << text;
      ctx.manifest.outputs.insert(ctx.manifest.outputs.begin(), common.out);
    }
    if (!common.manifest.empty()) {
      ctx.manifest.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::ofstream f(common.manifest);
      if (!f) config_error("cannot write " + common.manifest);
      f << ctx.manifest.to_json().dump(2) << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::ConfigError ? 2 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace reebldp::cli
