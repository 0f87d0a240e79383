#include "cavityflux/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "cavityflux/errors.hpp"

namespace cavityflux {

namespace {

constexpr double kCoincidence = 1e-12;

struct WallGeometry {
  Point2 start;
  Point2 end;
  Vec2 normal;
};

WallGeometry wall_geometry(const CavitySpec& c, Side side) {
  const double x0 = c.origin.x;
  const double y0 = c.origin.y;
  const double x1 = x0 + c.side;
  const double y1 = y0 + c.side;
  switch (side) {
    case Side::Bottom:
      return {{x0, y0}, {x1, y0}, {0.0, 1.0}};
    case Side::Right:
      return {{x1, y0}, {x1, y1}, {-1.0, 0.0}};
    case Side::Top:
      return {{x0, y1}, {x1, y1}, {0.0, -1.0}};
    case Side::Left:
      return {{x0, y0}, {x0, y1}, {1.0, 0.0}};
  }
  return {};
}

Side opposite(Side s) {
  switch (s) {
    case Side::Bottom:
      return Side::Top;
    case Side::Top:
      return Side::Bottom;
    case Side::Left:
      return Side::Right;
    case Side::Right:
      return Side::Left;
  }
  return s;
}

bool same_point(const Point2& a, const Point2& b) {
  return std::abs(a.x - b.x) < kCoincidence && std::abs(a.y - b.y) < kCoincidence;
}

bool finite(double v) { return std::isfinite(v); }

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

constexpr std::array<Side, 4> kSides{Side::Bottom, Side::Right, Side::Top, Side::Left};

}  // namespace

const char* to_string(Side side) {
  switch (side) {
    case Side::Bottom:
      return "bottom";
    case Side::Right:
      return "right";
    case Side::Top:
      return "top";
    case Side::Left:
      return "left";
  }
  return "?";
}

const char* to_string(OpeningKind kind) {
  return kind == OpeningKind::Port ? "port" : "aperture";
}

Scene Scene::build(const SceneDescription& desc) {
  if (!finite(desc.alpha) || desc.alpha < 0.0 || desc.alpha > 1.0) {
    throw ValidationError("alpha " + fmt_num(desc.alpha) + " outside [0,1]");
  }
  if (desc.cavities.empty()) throw ValidationError("scene has no cavities");

  Scene scene;
  scene.desc_ = desc;
  const auto& cavs = desc.cavities;
  const std::size_t n_cav = cavs.size();

  for (std::size_t i = 0; i < n_cav; ++i) {
    const auto& c = cavs[i];
    if (c.id.empty()) throw ValidationError("cavity #" + std::to_string(i) + " has an empty id");
    if (!finite(c.side) || c.side <= 0.0)
      throw ValidationError("cavity '" + c.id + "' side must be positive");
    if (!is_finite(c.origin)) throw ValidationError("cavity '" + c.id + "' origin is not finite");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = cavs[j];
      if (o.id == c.id) throw ValidationError("duplicate cavity id '" + c.id + "'");
      const double ox = std::min(c.origin.x + c.side, o.origin.x + o.side) - std::max(c.origin.x, o.origin.x);
      const double oy = std::min(c.origin.y + c.side, o.origin.y + o.side) - std::max(c.origin.y, o.origin.y);
      if (ox > kCoincidence && oy > kCoincidence)
        throw ValidationError("cavities '" + o.id + "' and '" + c.id + "' overlap");
      const bool touch_x = std::abs(ox) <= kCoincidence && oy > kCoincidence;
      const bool touch_y = std::abs(oy) <= kCoincidence && ox > kCoincidence;
      if ((touch_x || touch_y) && !(std::abs(c.side - o.side) < kCoincidence &&
                                    (std::abs(c.origin.x - o.origin.x) < kCoincidence ||
                                     std::abs(c.origin.y - o.origin.y) < kCoincidence))) {
        throw ValidationError("cavities '" + o.id + "' and '" + c.id + "' share only part of a wall");
      }
    }
  }

  // Neighbour across each wall, or -1 for exterior walls.
  std::vector<std::array<int, 4>> neighbour(n_cav, {-1, -1, -1, -1});
  for (std::size_t i = 0; i < n_cav; ++i) {
    for (std::size_t s = 0; s < 4; ++s) {
      const auto w = wall_geometry(cavs[i], kSides[s]);
      for (std::size_t j = 0; j < n_cav; ++j) {
        if (j == i) continue;
        const auto o = wall_geometry(cavs[j], opposite(kSides[s]));
        if (same_point(w.start, o.start) && same_point(w.end, o.end)) neighbour[i][s] = static_cast<int>(j);
      }
    }
  }

  scene.disc_cavity_.resize(desc.discs.size());
  for (std::size_t d = 0; d < desc.discs.size(); ++d) {
    const auto& disc = desc.discs[d];
    const std::string label = "disc #" + std::to_string(d);
    const int ci = scene.cavity_index(disc.cavity);
    if (ci < 0) throw ValidationError(label + " references unknown cavity '" + disc.cavity + "'");
    if (!finite(disc.radius) || disc.radius <= 0.0) throw ValidationError(label + " radius must be positive");
    if (!is_finite(disc.center)) throw ValidationError(label + " center is not finite");
    const auto& c = cavs[static_cast<std::size_t>(ci)];
    if (disc.center.x - disc.radius <= c.origin.x || disc.center.x + disc.radius >= c.origin.x + c.side ||
        disc.center.y - disc.radius <= c.origin.y || disc.center.y + disc.radius >= c.origin.y + c.side) {
      throw ValidationError(label + " (radius " + fmt_num(disc.radius) + ") does not fit strictly inside cavity '" +
                            c.id + "'");
    }
    for (std::size_t e = 0; e < d; ++e) {
      const auto& other = desc.discs[e];
      if (norm(other.center - disc.center) <= other.radius + disc.radius) {
        throw ValidationError(label + " overlaps disc #" + std::to_string(e));
      }
    }
    scene.disc_cavity_[d] = ci;
  }

  // Openings grouped by (cavity, side); apertures are registered on both sides.
  struct Placed {
    int opening;
    double lo;
    double hi;
  };
  std::vector<std::array<std::vector<Placed>, 4>> on_wall(n_cav);
  scene.opening_cavities_.resize(desc.openings.size());
  for (std::size_t k = 0; k < desc.openings.size(); ++k) {
    const auto& op = desc.openings[k];
    const std::string label = "opening '" + op.id + "'";
    if (op.id.empty()) throw ValidationError("opening #" + std::to_string(k) + " has an empty id");
    for (std::size_t e = 0; e < k; ++e)
      if (desc.openings[e].id == op.id) throw ValidationError("duplicate opening id '" + op.id + "'");
    const int ci = scene.cavity_index(op.wall.cavity);
    if (ci < 0) throw ValidationError(label + " references unknown cavity '" + op.wall.cavity + "'");
    if (!finite(op.width) || op.width <= 0.0) throw ValidationError(label + " width must be positive");
    const auto& c = cavs[static_cast<std::size_t>(ci)];
    const double lo = op.center_offset - 0.5 * op.width;
    const double hi = op.center_offset + 0.5 * op.width;
    if (!finite(op.center_offset) || lo <= 0.0 || hi >= c.side) {
      throw ValidationError(label + " (width " + fmt_num(op.width) + ") does not lie strictly within the " +
                            to_string(op.wall.side) + " wall of cavity '" + c.id + "'");
    }
    const auto s = static_cast<std::size_t>(op.wall.side);
    const int nb = neighbour[static_cast<std::size_t>(ci)][s];
    if (op.kind == OpeningKind::Port && nb >= 0)
      throw ValidationError(label + " is a port on a wall shared with cavity '" +
                            cavs[static_cast<std::size_t>(nb)].id + "'");
    if (op.kind == OpeningKind::Aperture && nb < 0)
      throw ValidationError(label + " is an aperture on an exterior wall");
    on_wall[static_cast<std::size_t>(ci)][s].push_back({static_cast<int>(k), lo, hi});
    if (nb >= 0) {
      on_wall[static_cast<std::size_t>(nb)][static_cast<std::size_t>(opposite(op.wall.side))].push_back(
          {static_cast<int>(k), lo, hi});
    }
    scene.opening_cavities_[k] = {ci, nb};
  }

  scene.cavity_surfaces_.resize(n_cav);
  std::vector<std::vector<int>> opening_surfs(desc.openings.size());
  for (std::size_t i = 0; i < n_cav; ++i) {
    for (std::size_t s = 0; s < 4; ++s) {
      auto& placed = on_wall[i][s];
      std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) { return a.lo < b.lo; });
      for (std::size_t q = 1; q < placed.size(); ++q) {
        if (placed[q].lo <= placed[q - 1].hi) {
          throw ValidationError("opening '" + desc.openings[static_cast<std::size_t>(placed[q].opening)].id +
                                "' overlaps opening '" +
                                desc.openings[static_cast<std::size_t>(placed[q - 1].opening)].id + "'");
        }
      }
      const auto w = wall_geometry(cavs[i], kSides[s]);
      const Vec2 dir = (w.end - w.start) / cavs[i].side;
      auto add_segment = [&](double a, double b, SurfaceKind kind, int opening) {
        Surface surf;
        surf.kind = kind;
        surf.cavity = static_cast<int>(i);
        surf.start = w.start + dir * a;
        surf.end = b >= cavs[i].side ? w.end : w.start + dir * b;
        surf.normal = w.normal;
        surf.opening = opening;
        surf.length = b - a;
        const int id = static_cast<int>(scene.surfaces_.size());
        scene.surfaces_.push_back(surf);
        scene.cavity_surfaces_[i].push_back(id);
        if (opening >= 0) opening_surfs[static_cast<std::size_t>(opening)].push_back(id);
      };
      double cursor = 0.0;
      for (const auto& p : placed) {
        add_segment(cursor, p.lo, SurfaceKind::Wall, -1);
        const auto kind = desc.openings[static_cast<std::size_t>(p.opening)].kind == OpeningKind::Port
                              ? SurfaceKind::Port
                              : SurfaceKind::Aperture;
        add_segment(p.lo, p.hi, kind, p.opening);
        cursor = p.hi;
      }
      add_segment(cursor, cavs[i].side, SurfaceKind::Wall, -1);
    }
    for (std::size_t d = 0; d < desc.discs.size(); ++d) {
      if (scene.disc_cavity_[d] != static_cast<int>(i)) continue;
      Surface surf;
      surf.kind = SurfaceKind::Disc;
      surf.cavity = static_cast<int>(i);
      surf.disc = static_cast<int>(d);
      surf.length = 2.0 * std::numbers::pi * desc.discs[d].radius;
      scene.cavity_surfaces_[i].push_back(static_cast<int>(scene.surfaces_.size()));
      scene.surfaces_.push_back(surf);
    }
  }
  for (const auto& surfs : opening_surfs) {
    if (surfs.size() == 2) {
      scene.surfaces_[static_cast<std::size_t>(surfs[0])].twin = surfs[1];
      scene.surfaces_[static_cast<std::size_t>(surfs[1])].twin = surfs[0];
    }
  }
  return scene;
}

Scene Scene::with_alpha(double alpha) const {
  SceneDescription d = desc_;
  d.alpha = alpha;
  return build(d);
}

int Scene::cavity_index(const std::string& id) const {
  for (std::size_t i = 0; i < desc_.cavities.size(); ++i)
    if (desc_.cavities[i].id == id) return static_cast<int>(i);
  return -1;
}

int Scene::opening_index(const std::string& id) const {
  for (std::size_t i = 0; i < desc_.openings.size(); ++i)
    if (desc_.openings[i].id == id) return static_cast<int>(i);
  return -1;
}

std::pair<int, int> Scene::opening_cavities(int opening) const {
  return opening_cavities_.at(static_cast<std::size_t>(opening));
}

std::vector<int> Scene::opening_surfaces(int opening) const {
  std::vector<int> out;
  for (std::size_t s = 0; s < surfaces_.size(); ++s)
    if (surfaces_[s].opening == opening) out.push_back(static_cast<int>(s));
  return out;
}

bool Scene::strictly_inside(const Point2& p, int cavity) const {
  const auto& c = desc_.cavities.at(static_cast<std::size_t>(cavity));
  if (!(p.x > c.origin.x && p.x < c.origin.x + c.side && p.y > c.origin.y && p.y < c.origin.y + c.side))
    return false;
  for (std::size_t d = 0; d < desc_.discs.size(); ++d) {
    if (disc_cavity_[d] != cavity) continue;
    if (norm(p - desc_.discs[d].center) <= desc_.discs[d].radius) return false;
  }
  return true;
}

std::optional<int> Scene::locate(const Point2& p) const {
  for (std::size_t i = 0; i < desc_.cavities.size(); ++i)
    if (strictly_inside(p, static_cast<int>(i))) return static_cast<int>(i);
  return std::nullopt;
}

Point2 Scene::surface_point(int surface, double arc_position) const {
  const auto& s = surfaces_.at(static_cast<std::size_t>(surface));
  if (s.is_segment()) return s.start + (s.end - s.start) * (arc_position / s.length);
  const auto& d = desc_.discs[static_cast<std::size_t>(s.disc)];
  const double phi = arc_position / d.radius;
  return d.center + Vec2{std::cos(phi), std::sin(phi)} * d.radius;
}

Vec2 Scene::surface_normal(int surface, double arc_position) const {
  const auto& s = surfaces_.at(static_cast<std::size_t>(surface));
  if (s.is_segment()) return s.normal;
  const double phi = arc_position / desc_.discs[static_cast<std::size_t>(s.disc)].radius;
  return {std::cos(phi), std::sin(phi)};
}

double Scene::total_boundary_length() const {
  double total = 0.0;
  for (const auto& s : surfaces_) total += s.length;
  return total;
}

std::vector<CavityDimensions> Scene::pwb_dimensions() const {
  std::vector<CavityDimensions> dims;
  for (std::size_t i = 0; i < desc_.cavities.size(); ++i) {
    CavityDimensions d;
    d.cavity = desc_.cavities[i].id;
    for (std::size_t k = 0; k < desc_.discs.size(); ++k)
      if (disc_cavity_[k] == static_cast<int>(i)) d.scatterer_perimeter += 2.0 * std::numbers::pi * desc_.discs[k].radius;
    d.perimeter = 4.0 * desc_.cavities[i].side + d.scatterer_perimeter;
    for (std::size_t k = 0; k < desc_.openings.size(); ++k) {
      const auto [a, b] = opening_cavities_[k];
      if (a != static_cast<int>(i) && b != static_cast<int>(i)) continue;
      if (desc_.openings[k].kind == OpeningKind::Port)
        d.port_width += desc_.openings[k].width;
      else
        d.aperture_width += desc_.openings[k].width;
    }
    dims.push_back(d);
  }
  return dims;
}

std::pair<Point2, Point2> Scene::bounding_box() const {
  Point2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Point2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const auto& c : desc_.cavities) {
    lo.x = std::min(lo.x, c.origin.x);
    lo.y = std::min(lo.y, c.origin.y);
    hi.x = std::max(hi.x, c.origin.x + c.side);
    hi.y = std::max(hi.y, c.origin.y + c.side);
  }
  return {lo, hi};
}

Hit first_hit_in(const Scene& scene, int cavity, const Point2& origin, const Vec2& direction) {
  const auto& surfaces = scene.surfaces();
  double best_t = std::numeric_limits<double>::infinity();
  int best = -1;
  double best_arc = 0.0;
  Vec2 best_normal;
  Point2 best_point;

  for (const int id : scene.cavity_surfaces(cavity)) {
    const Surface& s = surfaces[static_cast<std::size_t>(id)];
    if (s.is_segment()) {
      const double denom = dot(direction, s.normal);
      if (denom >= 0.0) continue;  // approaching from behind or parallel
      const double t = dot(s.start - origin, s.normal) / denom;
      if (!(t > 0.0) || t >= best_t) continue;
      const Vec2 along = (s.end - s.start) / s.length;
      const double u = dot(origin + direction * t - s.start, along);
      if (u < -kCoincidence || u > s.length + kCoincidence) continue;
      const double arc = std::clamp(u, 0.0, s.length);
      best_t = t;
      best = id;
      best_arc = arc;
      best_normal = s.normal;
      // Exactly on the wall line: the fixed coordinate is copied from the endpoint.
      best_point = arc >= s.length ? s.end : s.start + along * arc;
      if (s.normal.x != 0.0) best_point.x = s.start.x;
      if (s.normal.y != 0.0) best_point.y = s.start.y;
    } else {
      const auto& disc = scene.discs()[static_cast<std::size_t>(s.disc)];
      const Vec2 oc = origin - disc.center;
      const double b = dot(oc, direction);
      if (b >= 0.0) continue;  // moving away from the centre
      const double c = dot(oc, oc) - disc.radius * disc.radius;
      const double disc_term = b * b - c;
      if (disc_term <= kTangentTolerance) continue;
      const double t = c / (-b + std::sqrt(disc_term));
      if (!(t > 0.0) || t >= best_t) continue;
      const Vec2 n = normalized(origin + direction * t - disc.center);
      double phi = std::atan2(n.y, n.x);
      if (phi < 0.0) phi += 2.0 * std::numbers::pi;
      best_t = t;
      best = id;
      best_arc = std::min(phi * disc.radius, s.length);
      best_normal = n;
      best_point = disc.center + n * disc.radius;
    }
  }
  if (best < 0) {
    std::ostringstream os;
    os << "ray from (" << origin.x << ", " << origin.y << ") along (" << direction.x << ", " << direction.y
       << ") leaves cavity '" << scene.cavities()[static_cast<std::size_t>(cavity)].id << "' without a hit";
    throw GeometryError(os.str());
  }
  const Surface& s = surfaces[static_cast<std::size_t>(best)];
  Hit hit;
  hit.surface = best;
  hit.point = best_point;
  hit.distance = best_t;
  hit.arc_position = best_arc;
  hit.surface_normal = best_normal;
  hit.outgoing_direction = s.is_open() ? direction : normalized(reflect(direction, best_normal));
  return hit;
}

Hit first_hit(const Scene& scene, const Point2& origin, const Vec2& direction) {
  const auto cavity = scene.locate(origin + direction * kRayEpsilon);
  if (!cavity) {
    std::ostringstream os;
    os << "ray origin (" << origin.x << ", " << origin.y << ") is not inside any cavity";
    throw GeometryError(os.str());
  }
  return first_hit_in(scene, *cavity, origin, direction);
}

int cavity_beyond(const Scene& scene, int surface) {
  const auto& s = scene.surfaces().at(static_cast<std::size_t>(surface));
  if (s.kind != SurfaceKind::Aperture) return -1;
  return scene.surfaces()[static_cast<std::size_t>(s.twin)].cavity;
}

}  // namespace cavityflux
