#include "cfrelax/initial_data.hpp"

#include <cmath>
#include <numbers>

#include "cfrelax/error.hpp"

namespace cfrelax {

std::size_t preset_components(const InitialPreset& preset) {
  return std::visit(
      [](const auto& p) -> std::size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, preset::Bump>) return p.amplitude.size();
        else if constexpr (std::is_same_v<T, preset::Riemann>) return p.left.size();
        else return p.state.size();
      },
      preset);
}

Field make_initial(const Grid& grid, const InitialPreset& preset) {
  const std::size_t m = preset_components(preset);
  Field f(grid, m);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, preset::Bump>) {
          if (!(p.width > 0.0)) throw Error(ErrorKind::BadParameter, "bump width must be > 0");
          for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            const Point x = grid.position(c);
            const double dx = x[0] - p.center[0];
            const double dy = grid.dim() == 2 ? x[1] - p.center[1] : 0.0;
            const double s = std::hypot(dx, dy) / p.width;
            if (s >= 1.0) continue;
            const double shape = std::pow(std::cos(0.5 * std::numbers::pi * s), 2);
            auto w = f.at(c);
            for (std::size_t k = 0; k < m; ++k) w[k] = p.amplitude[k] * shape;
          }
        } else if constexpr (std::is_same_v<T, preset::Riemann>) {
          if (p.right.size() != m)
            throw Error(ErrorKind::BadParameter, "riemann states differ in length");
          if (!(p.half_width > 0.0))
            throw Error(ErrorKind::BadParameter, "riemann half-width must be > 0");
          for (std::size_t c = 0; c < grid.cell_count(); ++c) {
            const Point x = grid.position(c);
            if (grid.dim() == 2 && std::abs(x[1]) >= p.half_width) continue;
            const double offset = x[0] - p.interface;
            if (offset < -p.half_width || offset >= p.half_width) continue;
            f.store(c, offset < 0.0 ? p.left : p.right);
          }
        } else {
          for (std::size_t c = 0; c < grid.cell_count(); ++c) f.store(c, p.state);
        }
      },
      preset);
  return f;
}

}  // namespace cfrelax
