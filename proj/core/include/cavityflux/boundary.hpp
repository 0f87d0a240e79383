#pragma once
/// @file boundary.hpp
/// @brief Boundary mesh: every scene surface cut into short elements.

#include <vector>

#include "cavityflux/geometry.hpp"

namespace cavityflux {

enum class ElementBehavior { Reflecting, Port, Aperture };

struct BoundaryElement {
  int id{-1};
  int surface{-1};
  int cavity{-1};
  ElementBehavior behavior{ElementBehavior::Reflecting};
  /// Opening index for Port/Aperture elements, -1 otherwise.
  int opening{-1};
  /// Aperture elements: the element covering the same stretch from the other room.
  int twin{-1};
  double alpha{0.0};
  /// Arc-length interval on the surface.
  double arc_begin{0.0};
  double arc_end{0.0};
  double arc_length{0.0};
  Vec2 inward_normal;  ///< at the midpoint

  bool is_open() const { return behavior != ElementBehavior::Reflecting; }
};

class BoundaryMesh {
 public:
  /// Cuts every surface into ceil(length / target_length) equal elements.
  /// Throws ValidationError if target_length <= 0 or exceeds the narrowest opening.
  BoundaryMesh(const Scene& scene, double target_length);

  const std::vector<BoundaryElement>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  const BoundaryElement& operator[](std::size_t i) const { return elements_[i]; }
  double target_length() const { return target_length_; }

  /// Element containing the arc position on a surface.
  int element_at(int surface, double arc_position) const;
  /// Elements tiling an opening from the given room's side.
  std::vector<int> opening_elements(int opening) const;

  /// Point and normal at fraction `u` in [0,1] along the element.
  Point2 point_at(const Scene& scene, int element, double u) const;
  Vec2 normal_at(const Scene& scene, int element, double u) const;

  double total_length() const;

 private:
  double target_length_;
  std::vector<BoundaryElement> elements_;
  std::vector<int> surface_first_;
  std::vector<int> surface_count_;
};

}  // namespace cavityflux
