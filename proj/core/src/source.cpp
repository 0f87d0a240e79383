#include "cavityflux/source.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "cavityflux/errors.hpp"

namespace cavityflux {

std::string Source::label() const {
  if (kind == Kind::PortNormal) return "port:" + port;
  return fmt::format("point:{:g};{:g}", point.x, point.y);
}

void validate_source(const Scene& scene, const Source& source) {
  if (source.kind == Source::Kind::PortNormal) {
    const int k = scene.opening_index(source.port);
    if (k < 0) throw ValidationError("source references unknown port '" + source.port + "'");
    if (scene.openings()[static_cast<std::size_t>(k)].kind != OpeningKind::Port)
      throw ValidationError("source opening '" + source.port + "' is not an exterior port");
    return;
  }
  if (!is_finite(source.point) || !scene.locate(source.point)) {
    throw ValidationError(fmt::format("point source ({:g}, {:g}) is not strictly inside a cavity", source.point.x,
                                      source.point.y));
  }
}

LaunchRay launch_ray(const Scene& scene, const Source& source, double f) {
  if (source.kind == Source::Kind::PortNormal) {
    const int k = scene.opening_index(source.port);
    const int surface = scene.opening_surfaces(k).front();
    const auto& s = scene.surfaces()[static_cast<std::size_t>(surface)];
    return {s.cavity, scene.surface_point(surface, f * s.length), s.normal};
  }
  const double phi = 2.0 * std::numbers::pi * f;
  return {*scene.locate(source.point), source.point, {std::cos(phi), std::sin(phi)}};
}

}  // namespace cavityflux
