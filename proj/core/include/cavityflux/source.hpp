#pragma once
/// @file source.hpp
/// @brief Power sources shared by the ray tracer and the transfer-operator solver.

#include <string>

#include "cavityflux/geometry.hpp"

namespace cavityflux {

/// Unit-power source: a fan of rays launched normal to an exterior port, or an
/// isotropic point emitter inside a room.
struct Source {
  enum class Kind { PortNormal, Point };
  Kind kind{Kind::PortNormal};
  std::string port;
  Point2 point;

  static Source port_normal(std::string port_id) { return {Kind::PortNormal, std::move(port_id), {}}; }
  static Source point_isotropic(Point2 p) { return {Kind::Point, {}, p}; }

  /// Stable text label, e.g. "port:P1" or "point:0.5;0.4".
  std::string label() const;
};

struct LaunchRay {
  int cavity{-1};
  Point2 origin;
  Vec2 direction;
};

/// Throws ValidationError unless the port exists and is exterior, or the
/// point lies strictly inside a room and outside every disc.
void validate_source(const Scene& scene, const Source& source);

/// Ray at launch fraction `f` in [0,1): position across the port, or polar angle 2*pi*f.
LaunchRay launch_ray(const Scene& scene, const Source& source, double f);

}  // namespace cavityflux
