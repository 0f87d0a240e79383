#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "cavityflux/geometry.hpp"
#include "cavityflux/scene_io.hpp"

using namespace cavityflux;

static void BM_FirstHit(benchmark::State& state) {
  const Scene scene = Scene::build(preset_description("fig1a"));
  const Point2 origin{0.5, 0.5};
  std::size_t k = 0;
  for (auto _ : state) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k++ % 4096) / 4096.0;
    benchmark::DoNotOptimize(first_hit_in(scene, 0, origin, {std::cos(phi), std::sin(phi)}));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FirstHit);

static void BM_SceneBuild(benchmark::State& state) {
  const auto desc = preset_description("fig1a");
  for (auto _ : state) benchmark::DoNotOptimize(Scene::build(desc));
}
BENCHMARK(BM_SceneBuild);
