#pragma once
/// @file vec2.hpp
/// @brief Minimal 2D vector used by the geometry, ray and transfer-operator code.

#include <cmath>

namespace cavityflux {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2& operator+=(const Vec2& r) {
    x += r.x;
    y += r.y;
    return *this;
  }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& v) { return std::hypot(v.x, v.y); }
inline Vec2 normalized(const Vec2& v) { return v / norm(v); }

/// Mirror `d` about the line with unit normal `n`: d - 2 (d.n) n.
constexpr Vec2 reflect(const Vec2& d, const Vec2& n) { return d - n * (2.0 * dot(d, n)); }

/// Tangent used for the phase-space coordinate p = d . t on a boundary with inward normal n.
constexpr Vec2 tangent_of(const Vec2& n) { return {n.y, -n.x}; }

inline bool is_finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

using Point2 = Vec2;

}  // namespace cavityflux
