#include "cfrelax/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "cfrelax/error.hpp"

namespace cfrelax {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::BadParameter, message);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vector restrict(std::span<const double> x, const std::vector<std::size_t>& indices) {
  Vector out(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) out[k] = x[indices[k]];
  return out;
}

}  // namespace

ConvexSet::ConvexSet(std::size_t dim, Shape shape, Options options)
    : dim_(dim), shape_(std::move(shape)), allow_empty_interior_(options.allow_empty_interior) {
  require(dim_ > 0, "convex set dimension must be positive");
  anchor_ = options.anchor.value_or(Vector(dim_, 0.0));
  require(anchor_.size() == dim_, "anchor has wrong dimension");
  require(all_finite(anchor_), "anchor must be finite");
  margin_ = inner_margin(*this, anchor_);
  if (allow_empty_interior_) {
    require(margin_ >= -1e-12, "anchor lies outside the set");
  } else if (!(margin_ > 0.0)) {
    std::ostringstream os;
    os << "anchor is not an interior point (margin " << margin_ << ")";
    throw Error(ErrorKind::BadParameter, os.str());
  }
}

ConvexSet ConvexSet::ball(Vector center, double radius, Options options) {
  require(all_finite(center) && std::isfinite(radius), "ball parameters must be finite");
  require(radius >= 0.0, "ball radius must be nonnegative");
  const std::size_t dim = center.size();
  return ConvexSet(dim, Ball{std::move(center), radius}, std::move(options));
}

ConvexSet ConvexSet::box(Vector lo, Vector hi, Options options) {
  require(lo.size() == hi.size(), "box bounds differ in dimension");
  require(all_finite(lo) && all_finite(hi), "box bounds must be finite");
  for (std::size_t k = 0; k < lo.size(); ++k) require(lo[k] <= hi[k], "box requires lo <= hi");
  const std::size_t dim = lo.size();
  return ConvexSet(dim, Box{std::move(lo), std::move(hi)}, std::move(options));
}

ConvexSet ConvexSet::half_space(Vector normal, double offset, Options options) {
  require(all_finite(normal) && std::isfinite(offset), "half-space parameters must be finite");
  require(std::abs(norm(normal) - 1.0) <= 1e-12, "half-space normal must have unit length");
  const std::size_t dim = normal.size();
  return ConvexSet(dim, HalfSpace{std::move(normal), offset}, std::move(options));
}

ConvexSet ConvexSet::slab(std::size_t dim, std::size_t axis, double lo, double hi,
                          Options options) {
  require(axis < dim, "slab axis out of range");
  require(std::isfinite(lo) && std::isfinite(hi), "slab bounds must be finite");
  require(lo <= hi, "slab requires lo <= hi");
  return ConvexSet(dim, Slab{axis, lo, hi}, std::move(options));
}

ConvexSet ConvexSet::cylinder(std::size_t dim, std::vector<std::size_t> indices, ConvexSet inner,
                              Options options) {
  require(!indices.empty(), "cylinder needs at least one index");
  for (std::size_t k = 0; k < indices.size(); ++k) {
    require(indices[k] < dim, "cylinder index out of range");
    if (k > 0) require(indices[k - 1] < indices[k], "cylinder indices must be distinct and sorted");
  }
  require(inner.dim() == indices.size(), "cylinder inner set dimension must match index count");
  if (inner.allows_empty_interior()) options.allow_empty_interior = true;
  return ConvexSet(
      dim, Cylinder{std::move(indices), std::make_shared<const ConvexSet>(std::move(inner))},
      std::move(options));
}

ConvexSet ConvexSet::intersection(std::vector<ConvexSet> members, Options options,
                                  double tol_proj, std::size_t max_iter) {
  require(!members.empty(), "intersection needs at least one member");
  const std::size_t dim = members.front().dim();
  for (const auto& m : members) {
    require(m.dim() == dim, "intersection members differ in dimension");
    if (m.allows_empty_interior()) options.allow_empty_interior = true;
  }
  require(tol_proj > 0.0, "projection tolerance must be positive");
  require(max_iter > 0, "max_iter must be positive");
  return ConvexSet(dim, Intersection{std::move(members), tol_proj, max_iter}, std::move(options));
}

bool ConvexSet::exact() const {
  return std::visit(Overloaded{
                        [](const Cylinder& c) { return c.inner->exact(); },
                        [](const Intersection& i) { return i.members.size() == 1 && i.members[0].exact(); },
                        [](const auto&) { return true; },
                    },
                    shape_);
}

double inner_margin(const ConvexSet& set, std::span<const double> p) {
  return std::visit(
      Overloaded{
          [&](const Ball& b) { return b.radius - distance(b.center, p); },
          [&](const Box& b) {
            double m = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < b.lo.size(); ++k)
              m = std::min({m, p[k] - b.lo[k], b.hi[k] - p[k]});
            return m;
          },
          [&](const HalfSpace& h) { return h.offset - dot(h.normal, p); },
          [&](const Slab& s) { return std::min(p[s.axis] - s.lo, s.hi - p[s.axis]); },
          [&](const Cylinder& c) { return inner_margin(*c.inner, restrict(p, c.indices)); },
          [&](const Intersection& i) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& member : i.members) m = std::min(m, inner_margin(member, p));
            return m;
          },
      },
      set.shape());
}

void project_into(const ConvexSet& set, std::span<const double> x, std::span<double> out) {
  std::visit(
      Overloaded{
          [&](const Ball& b) {
            const double r = distance(x, b.center);
            if (r <= b.radius) {
              std::copy(x.begin(), x.end(), out.begin());
              return;
            }
            const double s = b.radius / r;
            for (std::size_t k = 0; k < x.size(); ++k)
              out[k] = b.center[k] + (x[k] - b.center[k]) * s;
          },
          [&](const Box& b) {
            for (std::size_t k = 0; k < x.size(); ++k) out[k] = std::clamp(x[k], b.lo[k], b.hi[k]);
          },
          [&](const HalfSpace& h) {
            const double excess = dot(h.normal, x) - h.offset;
            std::copy(x.begin(), x.end(), out.begin());
            if (excess > 0.0)
              for (std::size_t k = 0; k < x.size(); ++k) out[k] -= excess * h.normal[k];
          },
          [&](const Slab& s) {
            std::copy(x.begin(), x.end(), out.begin());
            out[s.axis] = std::clamp(x[s.axis], s.lo, s.hi);
          },
          [&](const Cylinder& c) {
            std::copy(x.begin(), x.end(), out.begin());
            const Vector sub = restrict(x, c.indices);
            Vector projected(sub.size());
            project_into(*c.inner, sub, projected);
            for (std::size_t k = 0; k < c.indices.size(); ++k) out[c.indices[k]] = projected[k];
          },
          [&](const Intersection& i) {
            if (i.members.size() == 1) {
              project_into(i.members.front(), x, out);
              return;
            }
            const Vector p = dykstra(i.members, x, i.tol_proj, i.max_iter);
            std::copy(p.begin(), p.end(), out.begin());
          },
      },
      set.shape());
}

Vector project(const ConvexSet& set, std::span<const double> x) {
  Vector out(x.size());
  project_into(set, x, out);
  return out;
}

double distance(const ConvexSet& set, std::span<const double> x) {
  return distance(x, project(set, x));
}

bool contains(const ConvexSet& set, std::span<const double> x, double tol) {
  if (const auto* i = std::get_if<Intersection>(&set.shape())) {
    const bool inside_all = std::all_of(i->members.begin(), i->members.end(),
                                        [&](const ConvexSet& m) { return contains(m, x, 0.0); });
    if (inside_all) return true;
  }
  return distance(set, x) <= tol;
}

Vector dykstra(std::span<const ConvexSet> members, std::span<const double> x0, double tol_proj,
               std::size_t max_iter) {
  const std::size_t dim = x0.size();
  Vector x(x0.begin(), x0.end());
  if (members.size() == 1) return project(members.front(), x);

  std::vector<Vector> increments(members.size(), Vector(dim, 0.0));
  Vector shifted(dim), next(dim), previous(dim);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    previous = x;
    // The iterate alone can stall for many sweeps while the correction of an
    // inactive member is still draining, so the corrections must settle too.
    double correction_change = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      for (std::size_t k = 0; k < dim; ++k) shifted[k] = x[k] + increments[i][k];
      project_into(members[i], shifted, next);
      double change = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double updated = shifted[k] - next[k];
        change += (updated - increments[i][k]) * (updated - increments[i][k]);
        increments[i][k] = updated;
      }
      correction_change = std::max(correction_change, std::sqrt(change));
      x.swap(next);
    }
    if (distance(x, previous) < tol_proj / 10.0 && correction_change < tol_proj / 10.0) {
      const bool feasible =
          std::all_of(members.begin(), members.end(),
                      [&](const ConvexSet& m) { return distance(m, x) < tol_proj; });
      if (feasible) return x;
    }
  }
  std::ostringstream os;
  os << "Dykstra did not reach tolerance " << tol_proj << " in " << max_iter << " sweeps";
  throw Error(ErrorKind::NonConvergence, os.str());
}

}  // namespace cfrelax
