#pragma once

// Closed-form initial data presets.

#include <variant>

#include "cfrelax/grid.hpp"
#include "cfrelax/linalg.hpp"

namespace cfrelax {
namespace preset {

/// amplitude * cos^2(pi s / 2), s = |x - center| / width < 1. H1, compact support.
struct Bump {
  Point center{0.0, 0.0};
  double width = 1.0;
  Vector amplitude;
};

/// `left` on interface - half_width <= x1 < interface, `right` on
/// interface <= x1 < interface + half_width (and |x2| < half_width in 2D),
/// zero elsewhere. A Riemann problem cut to compact support.
struct Riemann {
  Vector left;
  Vector right;
  double interface = 0.0;
  double half_width = 1.0;
};

struct Constant {
  Vector state;
};

}  // namespace preset

using InitialPreset = std::variant<preset::Bump, preset::Riemann, preset::Constant>;

std::size_t preset_components(const InitialPreset& preset);
Field make_initial(const Grid& grid, const InitialPreset& preset);

}  // namespace cfrelax
