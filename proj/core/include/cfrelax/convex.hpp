#pragma once

// Closed convex constraint sets with exact or Dykstra projections.
//
// Every set carries an anchor point and the radius of a ball around it that
// lies inside the set (its margin). Construction fails unless the margin is
// positive, so "the constraint set has nonempty interior" is checked once
// instead of being assumed by the solvers. Degenerate sets (radius-0 ball,
// flat box) are only accepted with Options::allow_empty_interior.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "cfrelax/linalg.hpp"

namespace cfrelax {

inline constexpr double kDefaultProjectionTolerance = 1e-10;
inline constexpr std::size_t kDefaultDykstraMaxIter = 10000;

class ConvexSet;

struct SetOptions {
  std::optional<Vector> anchor;  ///< defaults to the origin
  bool allow_empty_interior = false;
};

struct Ball {
  Vector center;
  double radius = 0.0;
};

struct Box {
  Vector lo;
  Vector hi;
};

/// {x : <normal; x> <= offset}, normal of unit length.
struct HalfSpace {
  Vector normal;
  double offset = 0.0;
};

/// {x : lo <= x[axis] <= hi}, every other component free.
struct Slab {
  std::size_t axis = 0;
  double lo = 0.0;
  double hi = 0.0;
};

/// {x : x restricted to `indices` lies in `inner`}.
struct Cylinder {
  std::vector<std::size_t> indices;
  std::shared_ptr<const ConvexSet> inner;
};

struct Intersection {
  std::vector<ConvexSet> members;
  double tol_proj = kDefaultProjectionTolerance;
  std::size_t max_iter = kDefaultDykstraMaxIter;
};

class ConvexSet {
 public:
  using Shape = std::variant<Ball, Box, HalfSpace, Slab, Cylinder, Intersection>;

  using Options = SetOptions;

  static ConvexSet ball(Vector center, double radius, Options options = {});
  static ConvexSet box(Vector lo, Vector hi, Options options = {});
  static ConvexSet half_space(Vector normal, double offset, Options options = {});
  static ConvexSet slab(std::size_t dim, std::size_t axis, double lo, double hi,
                        Options options = {});
  static ConvexSet cylinder(std::size_t dim, std::vector<std::size_t> indices, ConvexSet inner,
                            Options options = {});
  static ConvexSet intersection(std::vector<ConvexSet> members, Options options = {},
                                double tol_proj = kDefaultProjectionTolerance,
                                std::size_t max_iter = kDefaultDykstraMaxIter);

  std::size_t dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  const Vector& anchor() const { return anchor_; }
  /// Radius of the largest ball around the anchor contained in the set.
  double anchor_margin() const { return margin_; }
  bool allows_empty_interior() const { return allow_empty_interior_; }
  /// True when projection is closed-form (no Dykstra anywhere in the tree).
  bool exact() const;

 private:
  ConvexSet(std::size_t dim, Shape shape, Options options);

  std::size_t dim_ = 0;
  Shape shape_;
  Vector anchor_;
  double margin_ = 0.0;
  bool allow_empty_interior_ = false;
};

/// Signed radius of the largest ball around `point` inside the set
/// (negative when the point lies outside). Exact for every variant except
/// Intersection, where the minimum over members is a lower bound.
double inner_margin(const ConvexSet& set, std::span<const double> point);

bool contains(const ConvexSet& set, std::span<const double> x, double tol);

/// Nearest point of the set. Intersections throw NonConvergence when
/// Dykstra misses its tolerance.
Vector project(const ConvexSet& set, std::span<const double> x);
void project_into(const ConvexSet& set, std::span<const double> x, std::span<double> out);

double distance(const ConvexSet& set, std::span<const double> x);

/// Dykstra's alternating projections onto the intersection of `members`.
/// Stops once a sweep moves the iterate and every member correction by less
/// than tol_proj/10 and every member is within tol_proj.
Vector dykstra(std::span<const ConvexSet> members, std::span<const double> x,
               double tol_proj = kDefaultProjectionTolerance,
               std::size_t max_iter = kDefaultDykstraMaxIter);

}  // namespace cfrelax
