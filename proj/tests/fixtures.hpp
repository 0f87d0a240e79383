#pragma once

#include "cavityflux/geometry.hpp"
#include "cavityflux/scene_io.hpp"

namespace fixtures {

// Closed unit square without openings or scatterers.
inline cavityflux::SceneDescription empty_square(double alpha = 0.0) {
  cavityflux::SceneDescription d;
  d.name = "empty";
  d.alpha = alpha;
  d.cavities.push_back({"1", {0.0, 0.0}, 1.0});
  return d;
}

inline cavityflux::Scene preset(const char* name, double alpha = 0.0) {
  auto d = cavityflux::preset_description(name);
  d.alpha = alpha;
  return cavityflux::Scene::build(d);
}

}  // namespace fixtures
