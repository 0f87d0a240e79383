#include <benchmark/benchmark.h>

#include "cavityflux/dea.hpp"
#include "cavityflux/scene_io.hpp"

using namespace cavityflux;

// range(0): elements per unit length, n_dir fixed at 32.
static void BM_FlightMap(benchmark::State& state) {
  const Scene scene = Scene::build(preset_description("fig1a"));
  const dea::PhaseSpaceBasis basis(scene, 1.0 / static_cast<double>(state.range(0)), 32);
  for (auto _ : state) benchmark::DoNotOptimize(dea::FlightMap(scene, basis, {}, 1));
  state.counters["dim"] = static_cast<double>(basis.dim());
}
BENCHMARK(BM_FlightMap)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

// range(0): elements per unit length, range(1): n_dir. The small case stays
// under the dense LU limit, the large one goes through BiCGSTAB.
static void BM_Solve(benchmark::State& state) {
  auto desc = preset_description("fig1a");
  desc.alpha = 0.05;
  const Scene scene = Scene::build(desc);
  const dea::PhaseSpaceBasis basis(scene, 1.0 / static_cast<double>(state.range(0)), static_cast<int>(state.range(1)));
  const auto op = dea::assemble(scene, basis);
  const auto src = dea::source_vector(scene, basis, Source::port_normal("P1"), 1 << 14);
  for (auto _ : state) benchmark::DoNotOptimize(dea::solve(op, src.rho0));
  state.counters["dim"] = static_cast<double>(basis.dim());
}
BENCHMARK(BM_Solve)->Args({10, 8})->Args({50, 32})->Unit(benchmark::kMillisecond);
