#pragma once
/// @file raytrace.hpp
/// @brief Forward Monte-Carlo ray transport with per-reflection absorption.
///
/// Each ray starts with unit energy. At every reflecting hit a fraction alpha
/// of the current energy is deposited in the wall of the room where the hit
/// happens and the ray continues specularly with (1 - alpha) of it. A ray
/// reaching a port leaves with whatever energy it still carries; apertures are
/// crossed without loss and without counting a bounce. Rays below the energy
/// cutoff or at the bounce cap stop and their energy is booked as residual.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cavityflux/density_grid.hpp"
#include "cavityflux/geometry.hpp"
#include "cavityflux/source.hpp"

namespace cavityflux::rt {

struct RtConfig {
  std::size_t n_rays{8002};
  std::size_t max_bounces{10000};
  double energy_cutoff{1e-12};
  std::uint64_t rng_seed{1};
  /// Cells per unit length of the optional energy-density tally.
  std::optional<double> grid_resolution;
  /// Worker threads; 0 picks the hardware concurrency. Results do not depend on it.
  unsigned threads{0};
};

struct RayOutcome {
  int exit_opening{-1};
  double exit_energy{0.0};
  std::vector<double> wall;  ///< per room
  double residual{0.0};
  std::size_t bounces{0};
  /// Energy carried through each aperture surface crossing, keyed by surface id.
  std::vector<std::pair<int, double>> crossings;
};

struct PowerReport {
  std::map<std::string, double> p_port;      ///< by opening id
  std::map<std::string, double> p_wall;      ///< by cavity id
  std::map<std::string, double> p_crossing;  ///< "A:1>2" style keys
  double p_residual{0.0};
  double defect{0.0};
  std::size_t n_rays{0};
  double mean_bounces{0.0};
  std::optional<DensityGrid> density;
};

/// Called for every boundary interaction; `cavity` is the room the ray was in.
using HitObserver = std::function<void(const Hit& hit, int cavity)>;

/// Transports one ray until exit, cutoff or bounce cap.
RayOutcome trace_one(const Scene& scene, int cavity, Point2 origin, Vec2 direction, const RtConfig& cfg,
                     DensityGrid* grid = nullptr, const HitObserver& observer = {});

/// Launch fraction of ray k: stratified slot k of n with seeded jitter.
double launch_fraction(std::uint64_t seed, std::size_t k, std::size_t n);

/// Runs the ensemble. Bitwise reproducible for fixed inputs, independent of thread count.
PowerReport simulate(const Scene& scene, const Source& source, const RtConfig& cfg);

}  // namespace cavityflux::rt
