#include "cavityflux/density_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace cavityflux {

DensityGrid::DensityGrid(Point2 lo, Point2 hi, double cells_per_unit)
    : origin_(lo), cell_(1.0 / cells_per_unit) {
  nx_ = static_cast<std::size_t>(std::ceil((hi.x - lo.x) / cell_ - 1e-9));
  ny_ = static_cast<std::size_t>(std::ceil((hi.y - lo.y) / cell_ - 1e-9));
  values_.assign(nx_ * ny_, 0.0);
}

Point2 DensityGrid::cell_center(std::size_t ix, std::size_t iy) const {
  return {origin_.x + (static_cast<double>(ix) + 0.5) * cell_, origin_.y + (static_cast<double>(iy) + 0.5) * cell_};
}

// Amanatides-Woo traversal in grid coordinates.
void DensityGrid::deposit_segment(const Point2& a, const Point2& b, double weight) {
  const Vec2 d = b - a;
  const double length = norm(d);
  if (length <= 0.0 || values_.empty()) return;
  const double ax = (a.x - origin_.x) / cell_;
  const double ay = (a.y - origin_.y) / cell_;
  const double dx = d.x / cell_;
  const double dy = d.y / cell_;
  const auto clamp_cell = [](double v, std::size_t n) {
    return static_cast<long>(std::clamp(std::floor(v), 0.0, static_cast<double>(n) - 1.0));
  };
  // Start from a point slightly inside the segment so boundary-starting rays pick the right cell.
  long ix = clamp_cell(ax + dx * 1e-12, nx_);
  long iy = clamp_cell(ay + dy * 1e-12, ny_);
  const long step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const long step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  const double t_delta_x = step_x != 0 ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = step_y != 0 ? 1.0 / std::abs(dy) : inf;
  double t_max_x = step_x > 0 ? (static_cast<double>(ix + 1) - ax) / dx
                   : step_x < 0 ? (static_cast<double>(ix) - ax) / dx
                                : inf;
  double t_max_y = step_y > 0 ? (static_cast<double>(iy + 1) - ay) / dy
                   : step_y < 0 ? (static_cast<double>(iy) - ay) / dy
                                : inf;
  double t = 0.0;
  while (t < 1.0) {
    const double t_next = std::min({t_max_x, t_max_y, 1.0});
    if (t_next > t) values_[static_cast<std::size_t>(iy) * nx_ + static_cast<std::size_t>(ix)] += weight * (t_next - t) * length;
    t = t_next;
    if (t >= 1.0) break;
    if (t_max_x <= t_max_y) {
      ix += step_x;
      t_max_x += t_delta_x;
    } else {
      iy += step_y;
      t_max_y += t_delta_y;
    }
    if (ix < 0 || iy < 0 || ix >= static_cast<long>(nx_) || iy >= static_cast<long>(ny_)) break;
  }
}

void DensityGrid::scale(double factor) {
  for (double& v : values_) v *= factor;
}

void DensityGrid::add(const DensityGrid& other) {
  if (values_.empty()) {
    *this = other;
    return;
  }
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
}

double DensityGrid::sum() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

void DensityGrid::write_csv(std::ostream& os) const {
  for (std::size_t row = 0; row < ny_; ++row) {
    const std::size_t iy = ny_ - 1 - row;
    for (std::size_t ix = 0; ix < nx_; ++ix) {
      if (ix) os << ',';
      os << fmt::format("{:.10g}", at(ix, iy));
    }
    os << '\n';
  }
}

void DensityGrid::write_meta(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& extra) const {
  os << fmt::format("origin_x={:.17g}\norigin_y={:.17g}\ncell_size={:.17g}\nnx={}\nny={}\nrow_order=top_to_bottom\n",
                    origin_.x, origin_.y, cell_, nx_, ny_);
  for (const auto& [k, v] : extra) os << k << '=' << v << '\n';
}

}  // namespace cavityflux
