#include "cavityflux/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cavityflux/errors.hpp"
#include "cavityflux/numerics.hpp"

namespace cavityflux::rt {

namespace {

constexpr std::size_t kChunk = 1024;

struct ChunkTally {
  std::vector<CompensatedSum> port;
  std::vector<CompensatedSum> wall;
  std::vector<CompensatedSum> crossing;  // per surface
  CompensatedSum residual;
  double bounces{0.0};
  DensityGrid grid;
};

}  // namespace

RayOutcome trace_one(const Scene& scene, int cavity, Point2 origin, Vec2 direction, const RtConfig& cfg,
                     DensityGrid* grid, const HitObserver& observer) {
  RayOutcome out;
  out.wall.assign(scene.cavities().size(), 0.0);
  double energy = 1.0;
  const double alpha = scene.alpha();
  while (true) {
    const Hit hit = first_hit_in(scene, cavity, origin, direction);
    if (observer) observer(hit, cavity);
    if (grid) grid->deposit_segment(origin, hit.point, energy);
    const Surface& s = scene.surfaces()[static_cast<std::size_t>(hit.surface)];
    if (s.kind == SurfaceKind::Port) {
      out.exit_opening = s.opening;
      out.exit_energy = energy;
      return out;
    }
    if (s.kind == SurfaceKind::Aperture) {
      out.crossings.emplace_back(hit.surface, energy);
      cavity = cavity_beyond(scene, hit.surface);
      origin = hit.point + direction * kRayEpsilon;
      continue;
    }
    const double absorbed = alpha * energy;
    out.wall[static_cast<std::size_t>(cavity)] += absorbed;
    energy -= absorbed;
    ++out.bounces;
    direction = hit.outgoing_direction;
    origin = hit.point + direction * kRayEpsilon;
    if (energy <= cfg.energy_cutoff || out.bounces >= cfg.max_bounces) {
      out.residual = energy;
      return out;
    }
  }
}

double launch_fraction(std::uint64_t seed, std::size_t k, std::size_t n) {
  const double jitter = unit_interval(mix64(seed ^ mix64(static_cast<std::uint64_t>(k))));
  return (static_cast<double>(k) + jitter) / static_cast<double>(n);
}

PowerReport simulate(const Scene& scene, const Source& source, const RtConfig& cfg) {
  if (cfg.n_rays < 1) throw ValidationError("n_rays must be at least 1");
  if (cfg.max_bounces < 1) throw ValidationError("max_bounces must be at least 1");
  if (!(cfg.energy_cutoff >= 0.0 && cfg.energy_cutoff < 1.0)) throw ValidationError("energy_cutoff outside [0,1)");
  validate_source(scene, source);

  const std::size_t n_open = scene.openings().size();
  const std::size_t n_cav = scene.cavities().size();
  const std::size_t n_surf = scene.surfaces().size();
  const std::size_t n_chunks = (cfg.n_rays + kChunk - 1) / kChunk;
  std::vector<ChunkTally> chunks(n_chunks);

  auto run_chunk = [&](std::size_t c) {
    ChunkTally& t = chunks[c];
    t.port.assign(n_open, {});
    t.wall.assign(n_cav, {});
    t.crossing.assign(n_surf, {});
    if (cfg.grid_resolution) {
      const auto [lo, hi] = scene.bounding_box();
      t.grid = DensityGrid(lo, hi, *cfg.grid_resolution);
    }
    const std::size_t end = std::min(cfg.n_rays, (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) {
      const LaunchRay ray = launch_ray(scene, source, launch_fraction(cfg.rng_seed, k, cfg.n_rays));
      const RayOutcome o = trace_one(scene, ray.cavity, ray.origin, ray.direction, cfg,
                                     cfg.grid_resolution ? &t.grid : nullptr);
      if (o.exit_opening >= 0) t.port[static_cast<std::size_t>(o.exit_opening)] += o.exit_energy;
      for (std::size_t i = 0; i < n_cav; ++i) t.wall[i] += o.wall[i];
      for (const auto& [surf, e] : o.crossings) t.crossing[static_cast<std::size_t>(surf)] += e;
      t.residual += o.residual;
      t.bounces += static_cast<double>(o.bounces);
    }
  };

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
  if (workers <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < n_chunks; c += workers) run_chunk(c);
      });
    }
  }

  // Chunk-ordered merge keeps the result independent of the worker count.
  std::vector<CompensatedSum> port(n_open), wall(n_cav), crossing(n_surf);
  CompensatedSum residual;
  double bounces = 0.0;
  DensityGrid grid;
  for (const auto& t : chunks) {
    for (std::size_t i = 0; i < n_open; ++i) port[i].merge(t.port[i]);
    for (std::size_t i = 0; i < n_cav; ++i) wall[i].merge(t.wall[i]);
    for (std::size_t i = 0; i < n_surf; ++i) crossing[i].merge(t.crossing[i]);
    residual.merge(t.residual);
    bounces += t.bounces;
    if (cfg.grid_resolution) grid.add(t.grid);
  }

  const double inv_n = 1.0 / static_cast<double>(cfg.n_rays);
  PowerReport report;
  report.n_rays = cfg.n_rays;
  CompensatedSum total;
  for (std::size_t i = 0; i < n_open; ++i) {
    if (scene.openings()[i].kind != OpeningKind::Port) continue;
    report.p_port[scene.openings()[i].id] = port[i].value() * inv_n;
    total += port[i].value();
  }
  for (std::size_t i = 0; i < n_cav; ++i) {
    report.p_wall[scene.cavities()[i].id] = wall[i].value() * inv_n;
    total += wall[i].value();
  }
  for (std::size_t s = 0; s < n_surf; ++s) {
    const Surface& surf = scene.surfaces()[s];
    if (surf.kind != SurfaceKind::Aperture) continue;
    const std::string key = scene.openings()[static_cast<std::size_t>(surf.opening)].id + ":" +
                            scene.cavities()[static_cast<std::size_t>(surf.cavity)].id + ">" +
                            scene.cavities()[static_cast<std::size_t>(cavity_beyond(scene, static_cast<int>(s)))].id;
    report.p_crossing[key] = crossing[s].value() * inv_n;
  }
  report.p_residual = residual.value() * inv_n;
  total += residual.value();
  report.defect = std::abs(1.0 - total.value() * inv_n);
  report.mean_bounces = bounces * inv_n;
  if (cfg.grid_resolution) {
    grid.scale(inv_n / (grid.cell_size() * grid.cell_size()));
    report.density = std::move(grid);
  }
  return report;
}

}  // namespace cavityflux::rt
