#include <benchmark/benchmark.h>

#include "cavityflux/raytrace.hpp"
#include "cavityflux/scene_io.hpp"

using namespace cavityflux;

// Items are rays; alpha sets the mean path length.
static void BM_Simulate(benchmark::State& state) {
  auto desc = preset_description("fig1a");
  desc.alpha = static_cast<double>(state.range(0)) / 100.0;
  const Scene scene = Scene::build(desc);
  rt::RtConfig cfg;
  cfg.n_rays = 2000;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(rt::simulate(scene, Source::port_normal("P1"), cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(cfg.n_rays));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
