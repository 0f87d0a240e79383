#include "cavityflux/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cavityflux/errors.hpp"

namespace cavityflux {

BoundaryMesh::BoundaryMesh(const Scene& scene, double target_length) : target_length_(target_length) {
  if (!(target_length > 0.0) || !std::isfinite(target_length))
    throw ValidationError("element target length must be positive");
  double narrowest = std::numeric_limits<double>::infinity();
  std::string narrowest_id;
  for (const auto& op : scene.openings()) {
    if (op.width < narrowest) {
      narrowest = op.width;
      narrowest_id = op.id;
    }
  }
  if (target_length > narrowest) {
    throw ValidationError("element target length " + std::to_string(target_length) +
                          " exceeds the width of opening '" + narrowest_id + "'");
  }

  const auto& surfaces = scene.surfaces();
  surface_first_.resize(surfaces.size());
  surface_count_.resize(surfaces.size());
  for (std::size_t s = 0; s < surfaces.size(); ++s) {
    const Surface& surf = surfaces[s];
    const int n = std::max(1, static_cast<int>(std::ceil(surf.length / target_length - 1e-9)));
    surface_first_[s] = static_cast<int>(elements_.size());
    surface_count_[s] = n;
    const double h = surf.length / n;
    for (int k = 0; k < n; ++k) {
      BoundaryElement e;
      e.id = static_cast<int>(elements_.size());
      e.surface = static_cast<int>(s);
      e.cavity = surf.cavity;
      e.opening = surf.opening;
      e.behavior = surf.kind == SurfaceKind::Port       ? ElementBehavior::Port
                   : surf.kind == SurfaceKind::Aperture ? ElementBehavior::Aperture
                                                        : ElementBehavior::Reflecting;
      e.alpha = e.behavior == ElementBehavior::Reflecting ? scene.alpha() : 0.0;
      e.arc_begin = k * h;
      e.arc_end = k + 1 == n ? surf.length : (k + 1) * h;
      e.arc_length = e.arc_end - e.arc_begin;
      e.inward_normal = scene.surface_normal(static_cast<int>(s), 0.5 * (e.arc_begin + e.arc_end));
      elements_.push_back(e);
    }
  }
  // Twin surfaces share endpoints and direction, so element k maps to element k.
  for (auto& e : elements_) {
    if (e.behavior != ElementBehavior::Aperture) continue;
    const int twin_surface = surfaces[static_cast<std::size_t>(e.surface)].twin;
    e.twin = surface_first_[static_cast<std::size_t>(twin_surface)] +
             (e.id - surface_first_[static_cast<std::size_t>(e.surface)]);
  }
}

int BoundaryMesh::element_at(int surface, double arc_position) const {
  const auto s = static_cast<std::size_t>(surface);
  const int n = surface_count_[s];
  const double len = elements_[static_cast<std::size_t>(surface_first_[s] + n - 1)].arc_end;
  const int k = std::clamp(static_cast<int>(std::floor(arc_position / len * n)), 0, n - 1);
  return surface_first_[s] + k;
}

std::vector<int> BoundaryMesh::opening_elements(int opening) const {
  std::vector<int> out;
  for (const auto& e : elements_)
    if (e.opening == opening) out.push_back(e.id);
  return out;
}

Point2 BoundaryMesh::point_at(const Scene& scene, int element, double u) const {
  const auto& e = elements_[static_cast<std::size_t>(element)];
  return scene.surface_point(e.surface, e.arc_begin + u * e.arc_length);
}

Vec2 BoundaryMesh::normal_at(const Scene& scene, int element, double u) const {
  const auto& e = elements_[static_cast<std::size_t>(element)];
  return scene.surface_normal(e.surface, e.arc_begin + u * e.arc_length);
}

double BoundaryMesh::total_length() const {
  double total = 0.0;
  for (const auto& e : elements_) total += e.arc_length;
  return total;
}

}  // namespace cavityflux
