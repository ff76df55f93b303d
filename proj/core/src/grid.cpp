#include "cfrelax/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <ostream>
#include <sstream>

#include "cfrelax/error.hpp"

namespace cfrelax {

Grid::Grid(int dim, double half_width, int cells_per_axis)
    : dim_(dim), half_width_(half_width), cells_(cells_per_axis), spacing_(0.0) {
  if (dim_ != 1 && dim_ != 2) throw Error(ErrorKind::BadParameter, "grid dimension must be 1 or 2");
  if (!(half_width_ > 0.0) || !std::isfinite(half_width_))
    throw Error(ErrorKind::BadParameter, "grid half-width must be positive");
  if (cells_ < 4 || cells_ % 2 != 0)
    throw Error(ErrorKind::BadParameter, "cells per axis must be even and >= 4");
  spacing_ = 2.0 * half_width_ / cells_;
}

std::size_t Grid::cell_count() const {
  const auto n = static_cast<std::size_t>(cells_);
  return dim_ == 1 ? n : n * n;
}

Point Grid::position(std::size_t cell) const {
  const auto n = static_cast<std::size_t>(cells_);
  if (dim_ == 1) return {center(static_cast<int>(cell)), 0.0};
  return {center(static_cast<int>(cell % n)), center(static_cast<int>(cell / n))};
}

double Grid::radius(std::size_t cell) const {
  const Point p = position(cell);
  return dim_ == 1 ? std::abs(p[0]) : std::hypot(p[0], p[1]);
}

Field::Field(Grid grid, std::size_t components, double time)
    : grid_(grid), components_(components), data_(grid.cell_count() * components, 0.0), time_(time) {
  if (components_ == 0) throw Error(ErrorKind::BadParameter, "field needs at least one component");
}

void Field::store(std::size_t cell, std::span<const double> state) {
  for (double v : state)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "attempt to store a non-finite state");
  std::copy(state.begin(), state.end(), at(cell).begin());
}

void Field::check_finite() const {
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      std::ostringstream os;
      os << "non-finite value in cell " << k / components_ << " at t=" << time_;
      throw Error(ErrorKind::NonFinite, os.str());
    }
  }
}

bool in_region(const Region& region, double r) {
  if (std::holds_alternative<region::All>(region)) return true;
  if (const auto* b = std::get_if<region::Ball>(&region)) return r <= b->r;
  const auto& a = std::get<region::Annulus>(region);
  return r > a.r0 && r <= a.r1;
}

namespace {

template <class CellValue>
double region_sum(const Grid& grid, const Region& region, CellValue&& value) {
  std::vector<double> terms;
  terms.reserve(grid.cell_count());
  const bool all = std::holds_alternative<region::All>(region);
  for (std::size_t c = 0; c < grid.cell_count(); ++c)
    if (all || in_region(region, grid.radius(c))) terms.push_back(value(c));
  return pairwise_sum(terms) * grid.cell_volume();
}

}  // namespace

double l2_norm_squared(const Field& f, const Region& region) {
  return region_sum(f.grid(), region, [&](std::size_t c) {
    const auto s = f.at(c);
    return dot(s, s);
  });
}

double l2_norm(const Field& f, const Region& region) { return std::sqrt(l2_norm_squared(f, region)); }

double l2_distance(const Field& a, const Field& b, const Region& region) {
  if (!a.same_layout(b)) throw Error(ErrorKind::BadParameter, "fields differ in layout");
  return std::sqrt(region_sum(a.grid(), region, [&](std::size_t c) {
    const double d = distance(a.at(c), b.at(c));
    return d * d;
  }));
}

std::vector<double> mollifier_weights(double width, double spacing) {
  if (!(width >= spacing * (1.0 - 1e-12)))
    throw Error(ErrorKind::KernelUnderresolved, "mollifier width below grid spacing");
  const int radius = static_cast<int>(std::floor(4.0 * width / spacing + 1e-9));
  std::vector<double> w(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    const double x = k * spacing / width;
    w[k + radius] = std::exp(-0.5 * x * x);
  }
  const double total = pairwise_sum(w);
  for (double& v : w) v /= total;
  return w;
}

namespace {

// One-axis convolution; ghost cells are zero or copies of the edge cell.
Field convolve_axis(const Field& f, std::span<const double> weights, int axis, GhostFill ghost) {
  const Grid& g = f.grid();
  const int n = g.cells_per_axis();
  const int radius = static_cast<int>(weights.size() / 2);
  const std::size_t m = f.components();
  Field out(g, m, f.time());
  const int lines = g.dim() == 1 ? 1 : n;
  for (int line = 0; line < lines; ++line) {
    for (int i = 0; i < n; ++i) {
      const std::size_t target = axis == 0 ? g.index(i, line) : g.index(line, i);
      auto dst = out.at(target);
      for (int k = -radius; k <= radius; ++k) {
        int src_i = i + k;
        if (src_i < 0 || src_i >= n) {
          if (ghost == GhostFill::Zero) continue;
          src_i = std::clamp(src_i, 0, n - 1);
        }
        const std::size_t src = axis == 0 ? g.index(src_i, line) : g.index(line, src_i);
        const double w = weights[k + radius];
        const auto s = f.at(src);
        for (std::size_t c = 0; c < m; ++c) dst[c] += w * s[c];
      }
    }
  }
  return out;
}

}  // namespace

Field mollify(const Field& f, double width, GhostFill ghost) {
  const auto weights = mollifier_weights(width, f.grid().spacing());
  Field out = convolve_axis(f, weights, 0, ghost);
  if (f.grid().dim() == 2) out = convolve_axis(out, weights, 1, ghost);
  return out;
}

Field shift(const Field& f, LatticeShift cells) {
  const Grid& g = f.grid();
  const int n = g.cells_per_axis();
  Field out(g, f.components(), f.time());
  const int rows = g.dim() == 1 ? 1 : n;
  const int dj = g.dim() == 1 ? 0 : cells[1];
  for (int j = 0; j < rows; ++j) {
    const int sj = j + dj;
    if (sj < 0 || sj >= rows) continue;
    for (int i = 0; i < n; ++i) {
      const int si = i + cells[0];
      if (si < 0 || si >= n) continue;
      const auto src = f.at(g.index(si, sj));
      std::copy(src.begin(), src.end(), out.at(g.index(i, j)).begin());
    }
  }
  return out;
}

Field shift_by(const Field& f, std::span<const double> offset) {
  const Grid& g = f.grid();
  if (offset.size() != static_cast<std::size_t>(g.dim()))
    throw Error(ErrorKind::BadParameter, "shift offset has wrong dimension");
  LatticeShift cells{0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    const double k = offset[a] / g.spacing();
    const double rounded = std::round(k);
    if (std::abs(k - rounded) > 1e-9)
      throw Error(ErrorKind::BadParameter, "shift must be an integer multiple of the spacing");
    cells[a] = static_cast<int>(rounded);
  }
  return shift(f, cells);
}

double support_radius(const Field& f) {
  const Grid& g = f.grid();
  double r = 0.0;
  bool any = false;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const auto s = f.at(c);
    if (std::any_of(s.begin(), s.end(), [](double v) { return v != 0.0; })) {
      r = std::max(r, g.radius(c));
      any = true;
    }
  }
  if (!any) return 0.0;
  return r + 0.5 * g.spacing() * std::sqrt(static_cast<double>(g.dim()));
}

std::string format_double(double value) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(buf, static_cast<std::size_t>(len));
}

void write_csv(const Field& f, std::ostream& out) {
  const Grid& g = f.grid();
  for (int a = 0; a < g.dim(); ++a) out << (a ? "," : "") << 'x' << (a + 1);
  for (std::size_t c = 0; c < f.components(); ++c) out << ",w" << (c + 1);
  out << '\n';
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    const Point p = g.position(cell);
    for (int a = 0; a < g.dim(); ++a) out << (a ? "," : "") << format_double(p[a]);
    for (double v : f.at(cell)) out << ',' << format_double(v);
    out << '\n';
  }
}

}  // namespace cfrelax
