#include <benchmark/benchmark.h>

#include <cmath>
#include <optional>

#include "reebldp/action.hpp"
#include "reebldp/averaged_coeffs.hpp"
#include "reebldp/hamiltonian.hpp"
#include "reebldp/ldp.hpp"
#include "reebldp/reeb_graph.hpp"
#include "reebldp/sde.hpp"

using namespace reebldp;

namespace {

const HamiltonianSystem& harmonic() {
  static const HamiltonianSystem s = HamiltonianSystem::builtin("harmonic");
  return s;
}

const HamiltonianSystem& doublewell() {
  static const HamiltonianSystem s = HamiltonianSystem::builtin("doublewell");
  return s;
}

void BM_FieldEvaluate(benchmark::State& state) {
  const auto& sys = doublewell();
  Vec2 p{0.3, -0.2};
  for (auto _ : state) {
    benchmark::DoNotOptimize(sys.evaluate(p));
    p.x += 1e-12;
  }
}
BENCHMARK(BM_FieldEvaluate);

void BM_ReebBuild(benchmark::State& state) {
  const auto& sys = doublewell();
  for (auto _ : state) benchmark::DoNotOptimize(ReebGraph::build(sys, ReebBuildOptions{static_cast<int>(state.range(0))}));
}
BENCHMARK(BM_ReebBuild)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_CoefficientTables(benchmark::State& state) {
  const auto& sys = doublewell();
  const ReebGraph g = ReebGraph::build(sys);
  for (auto _ : state) benchmark::DoNotOptimize(CoefficientTables::build(sys, g));
}
BENCHMARK(BM_CoefficientTables)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  const auto& sys = harmonic();
  const ReebGraph g = ReebGraph::build(sys);
  SimulationConfig cfg;
  cfg.epsilon = 0.05;
  cfg.dt = 1e-4;
  cfg.x0 = {1.0, 0.0};
  cfg.record_stride = 10;
  std::uint32_t k = 0;
  for (auto _ : state) {
    cfg.trajectory = k++;
    benchmark::DoNotOptimize(simulate(sys, cfg, &g));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(std::llround(cfg.horizon / cfg.dt)));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

void BM_MinimizeDp(benchmark::State& state) {
  const auto& sys = doublewell();
  const ReebGraph g = ReebGraph::build(sys);
  const CoefficientTables t = CoefficientTables::build(sys, g);
  const auto& e = g.edges();
  std::size_t well = 0, top = 0;
  for (std::size_t i = 0; i < e.size(); ++i) (e[i].unbounded ? top : well) = i;
  const GraphPoint a{static_cast<int>(well), 0.1, std::nullopt};
  const GraphPoint b{static_cast<int>(top), 0.4, std::nullopt};
  MinimizeOptions opt;
  opt.n_time = static_cast<int>(state.range(0));
  opt.n_h = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(minimize_action(t, g, a, b, 1.0, opt));
}
BENCHMARK(BM_MinimizeDp)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BrownianOracle(benchmark::State& state) {
  BrownianParams p;
  p.paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(brownian_saddle_oracle(p));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BrownianOracle)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
