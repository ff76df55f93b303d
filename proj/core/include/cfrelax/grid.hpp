#pragma once

// Uniform Cartesian grids on [-X, X]^n (n = 1, 2) and cell-centred fields.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cfrelax/linalg.hpp"

namespace cfrelax {

using Point = std::array<double, 2>;
using LatticeShift = std::array<int, 2>;

/// Ghost-cell fill. Zero models the whole-space problem truncated to a
/// domain no signal reaches; Extrapolate copies the edge cell.
enum class GhostFill { Zero, Extrapolate };

class Grid {
 public:
  /// N >= 4 and even, so cell centres are symmetric about the origin.
  Grid(int dim, double half_width, int cells_per_axis);

  int dim() const { return dim_; }
  double half_width() const { return half_width_; }
  int cells_per_axis() const { return cells_; }
  double spacing() const { return spacing_; }
  double cell_volume() const { return dim_ == 1 ? spacing_ : spacing_ * spacing_; }
  std::size_t cell_count() const;

  /// Coordinate of the i-th centre along an axis.
  double center(int i) const { return -half_width_ + (i + 0.5) * spacing_; }
  Point position(std::size_t cell) const;
  double radius(std::size_t cell) const;
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * static_cast<std::size_t>(cells_);
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int dim_;
  double half_width_;
  int cells_;
  double spacing_;
};

/// Cell-centred state field; m doubles per cell, cell-major.
class Field {
 public:
  Field(Grid grid, std::size_t components, double time = 0.0);

  const Grid& grid() const { return grid_; }
  std::size_t components() const { return components_; }
  double time() const { return time_; }
  void set_time(double t) { time_ = t; }

  std::span<double> at(std::size_t cell) { return {data_.data() + cell * components_, components_}; }
  std::span<const double> at(std::size_t cell) const {
    return {data_.data() + cell * components_, components_};
  }
  /// Stores one cell's state; throws NonFinite on NaN/Inf.
  void store(std::size_t cell, std::span<const double> state);

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  /// Throws NonFinite when any entry is NaN or Inf.
  void check_finite() const;
  bool same_layout(const Field& other) const {
    return grid_ == other.grid_ && components_ == other.components_;
  }

 private:
  Grid grid_;
  std::size_t components_;
  std::vector<double> data_;
  double time_;
};

namespace region {
struct All {};
/// Cells with |x| <= r.
struct Ball {
  double r;
};
/// Cells with r0 < |x| <= r1.
struct Annulus {
  double r0;
  double r1;
};
}  // namespace region

using Region = std::variant<region::All, region::Ball, region::Annulus>;

bool in_region(const Region& region, double radius);

/// Midpoint-rule L2 norm over the cells whose centres lie in the region.
double l2_norm(const Field& f, const Region& region = region::All{});
/// Squared version, summed pairwise in fixed order.
double l2_norm_squared(const Field& f, const Region& region = region::All{});
/// L2 norm of (a - b) over a region.
double l2_distance(const Field& a, const Field& b, const Region& region = region::All{});

/// Separable truncated-Gaussian mollification: std `width`, support 4*width
/// per axis, weights renormalised to sum to one. Outside the grid the field
/// is zero or, with Extrapolate, equal to the nearest edge cell.
Field mollify(const Field& f, double width, GhostFill ghost = GhostFill::Zero);
/// Discrete weights used by mollify, index k <-> offset (k - radius) cells.
std::vector<double> mollifier_weights(double width, double spacing);

/// g(x) = f(x + shift*h), zero entering from outside the grid.
Field shift(const Field& f, LatticeShift cells);
/// Same, for a physical offset that must be a lattice multiple of h.
Field shift_by(const Field& f, std::span<const double> offset);

/// Largest |x| over cells with a nonzero state, plus half a cell diagonal.
/// Zero for an all-zero field.
double support_radius(const Field& f);

/// Writes `x1..xn, w1..wm` rows with %.17g formatting.
void write_csv(const Field& f, std::ostream& out);
std::string format_double(double value);

}  // namespace cfrelax
