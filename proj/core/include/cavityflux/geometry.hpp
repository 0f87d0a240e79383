#pragma once
/// @file geometry.hpp
/// @brief Coupled square cavities with circular scatterers and wall openings.
///
/// A scene is a set of axis-aligned square rooms. Rooms may share a full wall;
/// openings cut a wall either to the exterior (ports) or into the neighbouring
/// room (apertures). Every room boundary is decomposed into *surfaces*:
///
///   - wall pieces between openings (reflecting),
///   - one surface per port,
///   - one surface per aperture *side* (the two sides are twins),
///   - one full circle per disc.
///
/// Each surface carries the inward normal of the room that owns it. A shared
/// wall therefore appears twice, once per room, with opposite normals, and a
/// ray only ever interacts with surfaces it approaches from their room side.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cavityflux/vec2.hpp"

namespace cavityflux {

enum class Side { Bottom, Right, Top, Left };
enum class OpeningKind { Port, Aperture };

const char* to_string(Side side);
const char* to_string(OpeningKind kind);

struct CavitySpec {
  std::string id;
  Point2 origin;
  double side{1.0};
};

struct DiscSpec {
  std::string cavity;
  Point2 center;
  double radius{0.1};
};

struct WallRef {
  std::string cavity;
  Side side{Side::Top};
};

struct OpeningSpec {
  std::string id;
  OpeningKind kind{OpeningKind::Port};
  WallRef wall;
  /// Distance from the wall's start corner (left end of horizontal walls,
  /// bottom end of vertical walls) to the opening centre.
  double center_offset{0.5};
  double width{0.1};
};

/// Unvalidated scene configuration, as read from JSON or a preset.
struct SceneDescription {
  std::string name;
  std::vector<CavitySpec> cavities;
  std::vector<DiscSpec> discs;
  std::vector<OpeningSpec> openings;
  double alpha{0.0};
};

enum class SurfaceKind { Wall, Disc, Port, Aperture };

struct Surface {
  SurfaceKind kind{SurfaceKind::Wall};
  int cavity{-1};
  /// Segment surfaces: start/end points and constant inward normal.
  Point2 start;
  Point2 end;
  Vec2 normal;
  /// Disc surfaces: index into Scene::discs().
  int disc{-1};
  /// Port/aperture surfaces: index into Scene::openings().
  int opening{-1};
  /// Aperture surfaces: the matching surface on the other side of the wall.
  int twin{-1};
  double length{0.0};

  bool is_segment() const { return kind != SurfaceKind::Disc; }
  bool is_open() const { return kind == SurfaceKind::Port || kind == SurfaceKind::Aperture; }
};

struct Hit {
  int surface{-1};
  Point2 point;
  double distance{0.0};
  /// Arc-length coordinate of the hit point along the surface.
  double arc_position{0.0};
  /// Inward normal of the owning room at the hit point.
  Vec2 surface_normal;
  /// Mirror of the incoming direction for reflecting surfaces; the incoming
  /// direction itself for open surfaces.
  Vec2 outgoing_direction;
};

/// Per-room quantities used by the power balance method.
struct CavityDimensions {
  std::string cavity;
  double perimeter{0.0};         ///< walls plus disc circumferences
  double port_width{0.0};        ///< sum of exterior ports on this room
  double aperture_width{0.0};    ///< sum of apertures on this room
  double scatterer_perimeter{0.0};
};

/// Validated, immutable scene. All queries are const and thread-safe.
class Scene {
 public:
  /// Validates `desc` and builds the surface decomposition.
  /// Throws ValidationError naming the offending entity.
  static Scene build(const SceneDescription& desc);

  const SceneDescription& description() const { return desc_; }
  const std::string& name() const { return desc_.name; }
  double alpha() const { return desc_.alpha; }
  const std::vector<CavitySpec>& cavities() const { return desc_.cavities; }
  const std::vector<DiscSpec>& discs() const { return desc_.discs; }
  const std::vector<OpeningSpec>& openings() const { return desc_.openings; }
  const std::vector<Surface>& surfaces() const { return surfaces_; }

  /// Same geometry with a different absorption factor.
  Scene with_alpha(double alpha) const;

  int cavity_index(const std::string& id) const;
  int opening_index(const std::string& id) const;
  int disc_cavity(int disc) const { return disc_cavity_[static_cast<std::size_t>(disc)]; }
  /// Cavities on the two sides of an opening; `second` is -1 for ports.
  std::pair<int, int> opening_cavities(int opening) const;
  /// Surface ids of an opening (one for ports, two for apertures).
  std::vector<int> opening_surfaces(int opening) const;
  const std::vector<int>& cavity_surfaces(int cavity) const {
    return cavity_surfaces_[static_cast<std::size_t>(cavity)];
  }

  /// Room containing `p` in its free interior (outside every disc), if any.
  std::optional<int> locate(const Point2& p) const;
  bool strictly_inside(const Point2& p, int cavity) const;

  Point2 surface_point(int surface, double arc_position) const;
  Vec2 surface_normal(int surface, double arc_position) const;

  /// Sum of every room's boundary length (shared walls counted once per side).
  double total_boundary_length() const;
  std::vector<CavityDimensions> pwb_dimensions() const;

  /// Lower-left and upper-right corners of the union of rooms.
  std::pair<Point2, Point2> bounding_box() const;

 private:
  SceneDescription desc_;
  std::vector<Surface> surfaces_;
  std::vector<std::vector<int>> cavity_surfaces_;
  std::vector<int> disc_cavity_;
  std::vector<std::pair<int, int>> opening_cavities_;
};

/// Points closer than this to a wall are placed on it; also the post-hit advance.
inline constexpr double kRayEpsilon = 1e-9;
/// Disc discriminants below this count as tangent misses.
inline constexpr double kTangentTolerance = 1e-12;

/// Nearest boundary hit of the ray leaving `origin` along unit `direction`,
/// restricted to the surfaces of room `cavity`. Throws GeometryError on a miss.
Hit first_hit_in(const Scene& scene, int cavity, const Point2& origin, const Vec2& direction);

/// As first_hit_in, locating the room from a point just ahead of `origin`.
Hit first_hit(const Scene& scene, const Point2& origin, const Vec2& direction);

/// Room on the far side of an aperture surface hit from `surface`'s room.
int cavity_beyond(const Scene& scene, int surface);

}  // namespace cavityflux
