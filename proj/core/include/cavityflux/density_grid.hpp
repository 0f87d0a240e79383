#pragma once
/// @file density_grid.hpp
/// @brief Regular grid accumulating path-length weighted quantities.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "cavityflux/vec2.hpp"

namespace cavityflux {

class DensityGrid {
 public:
  DensityGrid() = default;
  /// Cells of size 1/cells_per_unit covering [lo, hi].
  DensityGrid(Point2 lo, Point2 hi, double cells_per_unit);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double cell_size() const { return cell_; }
  Point2 origin() const { return origin_; }
  bool empty() const { return values_.empty(); }

  double& at(std::size_t ix, std::size_t iy) { return values_[iy * nx_ + ix]; }
  double at(std::size_t ix, std::size_t iy) const { return values_[iy * nx_ + ix]; }
  Point2 cell_center(std::size_t ix, std::size_t iy) const;
  const std::vector<double>& values() const { return values_; }

  /// Adds weight x (length of a->b inside each cell) to the cells the segment crosses.
  void deposit_segment(const Point2& a, const Point2& b, double weight);

  void scale(double factor);
  void add(const DensityGrid& other);
  double sum() const;

  /// Rows from top (largest y) to bottom, comma separated.
  void write_csv(std::ostream& os) const;
  /// key=value sidecar describing the grid placement.
  void write_meta(std::ostream& os, const std::vector<std::pair<std::string, std::string>>& extra = {}) const;

 private:
  Point2 origin_;
  double cell_{1.0};
  std::size_t nx_{0};
  std::size_t ny_{0};
  std::vector<double> values_;
};

}  // namespace cavityflux
