#include "cfrelax/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cfrelax/error.hpp"

namespace cfrelax {
namespace {

constexpr double kStabilitySlack = 1e-12;

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::BadParameter, message);
}

// Visits every grid line along `axis`; `fn(cell_of_position)` returns the
// linear index of the i-th cell on the line.
template <class Fn>
void for_each_line(const Grid& g, int axis, Fn&& fn) {
  const int n = g.cells_per_axis();
  const int lines = g.dim() == 1 ? 1 : n;
  for (int line = 0; line < lines; ++line) {
    if (axis == 0)
      fn([&g, line](int i) { return g.index(i, line); });
    else
      fn([&g, line](int i) { return g.index(line, i); });
  }
}

Field directional_upwind(const FriedrichsSystem& sys, const Field& f, double dt, int axis,
                         GhostFill ghost) {
  const Grid& g = f.grid();
  const std::size_t m = f.components();
  const Eigensystem& eig = sys.eigen(static_cast<std::size_t>(axis));
  const double h = g.spacing();

  std::vector<double> courant(m);
  for (std::size_t k = 0; k < m; ++k) {
    courant[k] = eig.values[k] * dt / h;
    if (std::abs(courant[k]) > 1.0 + kStabilitySlack) {
      std::ostringstream os;
      os << "Courant number " << std::abs(courant[k]) << " exceeds 1 in direction " << axis + 1;
      throw Error(ErrorKind::CFLViolation, os.str());
    }
  }

  const std::size_t cells = g.cell_count();
  std::vector<double> chars(cells * m), updated(cells * m);
  for (std::size_t c = 0; c < cells; ++c)
    multiply_transposed(eig.vectors, f.at(c), std::span<double>(chars.data() + c * m, m));

  const int n = g.cells_per_axis();
  for_each_line(g, axis, [&](auto cell) {
    for (int i = 0; i < n; ++i) {
      const std::size_t here = cell(i);
      for (std::size_t k = 0; k < m; ++k) {
        const double nu = courant[k];
        const double own = chars[here * m + k];
        if (nu == 0.0) {
          updated[here * m + k] = own;
          continue;
        }
        const int up_i = nu > 0.0 ? i - 1 : i + 1;
        double upstream = 0.0;
        if (up_i >= 0 && up_i < n)
          upstream = chars[cell(up_i) * m + k];
        else if (ghost == GhostFill::Extrapolate)
          upstream = own;
        const double a = std::abs(nu);
        updated[here * m + k] = (1.0 - a) * own + a * upstream;
      }
    }
  });

  Field out(g, m, f.time());
  for (std::size_t c = 0; c < cells; ++c)
    multiply(eig.vectors, std::span<const double>(updated.data() + c * m, m), out.at(c));
  return out;
}

// State of the neighbour at offset `step` (+1/-1) along `axis`, honouring the
// ghost fill. Returns false for a zero ghost.
template <class Cell>
std::span<const double> neighbour(const Field& f, Cell&& cell, int i, int step, GhostFill ghost,
                                  std::span<const double> zero) {
  const int j = i + step;
  const int n = f.grid().cells_per_axis();
  if (j >= 0 && j < n) return f.at(cell(j));
  return ghost == GhostFill::Zero ? zero : f.at(cell(i));
}

}  // namespace

void SolverConfig::validate() const {
  require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be > 0");
  require(std::isfinite(eta) && eta >= 0.0, "eta must be >= 0");
  require(std::isfinite(final_time) && final_time > 0.0, "final time must be > 0");
  require(cfl > 0.0 && cfl <= 1.0, "cfl must lie in (0, 1]");
  require(record_every >= 1, "record_every must be >= 1");
  for (double t : snapshot_times)
    require(std::isfinite(t) && t >= 0.0 && t <= final_time, "snapshot times must lie in [0, T]");
  if (mollifier) require(std::isfinite(*mollifier) && *mollifier >= 0.0, "mollifier must be >= 0");
  if (max_dt) require(std::isfinite(*max_dt) && *max_dt > 0.0, "max_dt must be > 0");
}

double SolverConfig::mollifier_width() const { return mollifier.value_or(eta); }

bool RunReport::energy_bounded_by_data() const {
  return std::all_of(records.begin(), records.end(), [&](const StepRecord& r) {
    return r.energy <= data_energy * (1.0 + 1e-12);
  });
}

double RunReport::max_constraint_distance() const {
  double d = 0.0;
  for (const auto& r : records) d = std::max(d, r.constraint_dist);
  return d;
}

double stable_dt(const FriedrichsSystem& sys, const Grid& grid, const SolverConfig& cfg,
                 double remaining) {
  const double h = grid.spacing();
  const double n = grid.dim();
  const double speed = sys.speed_bound();
  double dt = remaining;
  if (speed > 0.0) {
    const double directions = cfg.scheme == Scheme::Rusanov ? n : 1.0;
    dt = std::min(dt, cfg.cfl * h / (directions * speed));
  }
  if (cfg.eta > 0.0) dt = std::min(dt, h * h / (2.0 * n * cfg.eta));
  if (speed == 0.0 && cfg.eta == 0.0) dt = std::min(dt, h);
  if (cfg.max_dt) dt = std::min(dt, *cfg.max_dt);
  return dt;
}

Field upwind_step(const FriedrichsSystem& sys, const Field& f, double dt, GhostFill ghost) {
  if (f.grid().dim() == 1) return directional_upwind(sys, f, dt, 0, ghost);
  Field a = directional_upwind(sys, f, 0.5 * dt, 0, ghost);
  Field b = directional_upwind(sys, a, dt, 1, ghost);
  return directional_upwind(sys, b, 0.5 * dt, 0, ghost);
}

Field rusanov_step(const FriedrichsSystem& sys, const Field& f, double dt, GhostFill ghost) {
  const Grid& g = f.grid();
  const std::size_t m = f.components();
  const double h = g.spacing();
  const double speed = sys.speed_bound();
  if (g.dim() * speed * dt / h > 1.0 + kStabilitySlack)
    throw Error(ErrorKind::CFLViolation, "Rusanov step violates n L dt / h <= 1");

  Field out = f;
  const std::vector<double> zero(m, 0.0);
  std::vector<double> sum(m), flux_left(m), flux_right(m), tmp(m);
  const double ratio = dt / h;
  const int n = g.cells_per_axis();

  // Numerical flux through the face between states a (left) and b (right).
  auto face_flux = [&](const Matrix& b_mat, std::span<const double> a, std::span<const double> b,
                       std::span<double> out_flux) {
    for (std::size_t k = 0; k < m; ++k) sum[k] = a[k] + b[k];
    multiply(b_mat, sum, out_flux);
    for (std::size_t k = 0; k < m; ++k) out_flux[k] = 0.5 * out_flux[k] - 0.5 * speed * (b[k] - a[k]);
  };

  for (int axis = 0; axis < g.dim(); ++axis) {
    const Matrix& b_mat = sys.matrix(static_cast<std::size_t>(axis));
    for_each_line(g, axis, [&](auto cell) {
      for (int i = 0; i < n; ++i) {
        const auto here = f.at(cell(i));
        face_flux(b_mat, neighbour(f, cell, i, -1, ghost, zero), here, flux_left);
        face_flux(b_mat, here, neighbour(f, cell, i, +1, ghost, zero), flux_right);
        auto dst = out.at(cell(i));
        for (std::size_t k = 0; k < m; ++k) dst[k] -= ratio * (flux_right[k] - flux_left[k]);
      }
    });
  }
  return out;
}

Field diffusion_step(const Field& f, double eta, double dt, GhostFill ghost) {
  if (eta == 0.0) return f;
  const Grid& g = f.grid();
  const double h = g.spacing();
  const double mu = eta * dt / (h * h);
  if (mu > 1.0 / (2.0 * g.dim()) * (1.0 + kStabilitySlack))
    throw Error(ErrorKind::StabilityViolation, "explicit diffusion needs eta dt <= h^2 / (2n)");

  const std::size_t m = f.components();
  const std::vector<double> zero(m, 0.0);
  const int n = g.cells_per_axis();
  Field out = f;
  for (int axis = 0; axis < g.dim(); ++axis) {
    for_each_line(g, axis, [&](auto cell) {
      for (int i = 0; i < n; ++i) {
        const auto here = f.at(cell(i));
        const auto left = neighbour(f, cell, i, -1, ghost, zero);
        const auto right = neighbour(f, cell, i, +1, ghost, zero);
        auto dst = out.at(cell(i));
        for (std::size_t k = 0; k < m; ++k) dst[k] += mu * (left[k] - 2.0 * here[k] + right[k]);
      }
    });
  }
  return out;
}

Field relaxation_step_exact(const ConvexSet& k, const Field& f, double epsilon, double dt) {
  require(epsilon > 0.0, "epsilon must be > 0");
  const double decay = std::exp(-dt / epsilon);
  const std::size_t m = f.components();
  Field out(f.grid(), m, f.time());
  std::vector<double> p(m);
  for (std::size_t c = 0; c < f.grid().cell_count(); ++c) {
    const auto w = f.at(c);
    project_into(k, w, p);
    auto dst = out.at(c);
    for (std::size_t i = 0; i < m; ++i) dst[i] = p[i] + (w[i] - p[i]) * decay;
  }
  return out;
}

Field relaxation_step_implicit(const ConvexSet& k, const Field& f, double epsilon, double dt) {
  require(epsilon > 0.0, "epsilon must be > 0");
  const double tau = dt / epsilon;
  const std::size_t m = f.components();
  Field out(f.grid(), m, f.time());
  std::vector<double> p(m);
  for (std::size_t c = 0; c < f.grid().cell_count(); ++c) {
    const auto w = f.at(c);
    project_into(k, w, p);
    auto dst = out.at(c);
    for (std::size_t i = 0; i < m; ++i) dst[i] = (w[i] + tau * p[i]) / (1.0 + tau);
  }
  return out;
}

Field transport_step(const FriedrichsSystem& sys, const Field& f, const SolverConfig& cfg,
                     double dt) {
  return cfg.scheme == Scheme::Upwind ? upwind_step(sys, f, dt, cfg.boundary)
                                      : rusanov_step(sys, f, dt, cfg.boundary);
}

Field strang_step(const FriedrichsSystem& sys, const ConvexSet& k, const Field& f,
                  const SolverConfig& cfg, double dt) {
  auto relax = [&](const Field& w) {
    return cfg.relaxation == RelaxationMethod::Exact
               ? relaxation_step_exact(k, w, cfg.epsilon, 0.5 * dt)
               : relaxation_step_implicit(k, w, cfg.epsilon, 0.5 * dt);
  };
  Field w = relax(f);
  w = transport_step(sys, w, cfg, dt);
  if (cfg.eta > 0.0) w = diffusion_step(w, cfg.eta, dt, cfg.boundary);
  w = relax(w);
  w.set_time(f.time() + dt);
  return w;
}

double constraint_distance(const ConvexSet& k, const Field& f) {
  double d = 0.0;
  for (std::size_t c = 0; c < f.grid().cell_count(); ++c) d = std::max(d, distance(k, f.at(c)));
  return d;
}

void support_precheck(const FriedrichsSystem& sys, const Field& initial, const SolverConfig& cfg) {
  if (cfg.boundary != GhostFill::Zero) return;
  const Grid& g = initial.grid();
  const double reach = support_radius(initial) + g.dim() * sys.speed_bound() * cfg.final_time +
                       4.0 * cfg.mollifier_width() + 8.0 * g.spacing();
  if (reach > g.half_width()) {
    std::ostringstream os;
    os << "signal may reach the boundary: support + n L T + 4 mollifier + 8 h = " << reach
       << " > X = " << g.half_width();
    throw Error(ErrorKind::SupportPrecheckFailed, os.str());
  }
}

RunReport run(const FriedrichsSystem& sys, const ConvexSet& k, const Field& initial,
              const SolverConfig& cfg) {
  cfg.validate();
  const Grid& g = initial.grid();
  require(sys.state_dim() == initial.components(), "field components must equal the state size");
  require(k.dim() == sys.state_dim(), "constraint dimension must equal the state size");
  require(static_cast<int>(sys.space_dim()) == g.dim(), "system and grid differ in dimension");
  if (cfg.boundary == GhostFill::Zero)
    require(contains(k, std::vector<double>(sys.state_dim(), 0.0), 0.0),
            "zero ghost fill needs the origin inside the constraint set");
  initial.check_finite();
  support_precheck(sys, initial, cfg);

  RunReport report;
  report.config = cfg;
  report.data_energy = l2_norm_squared(initial);

  Field w = cfg.mollifier_width() > 0.0 ? mollify(initial, cfg.mollifier_width(), cfg.boundary) : initial;
  w.set_time(0.0);
  report.initial = w;

  std::vector<double> stops = cfg.snapshot_times;
  stops.push_back(cfg.final_time);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
  std::erase_if(stops, [](double t) { return t <= 0.0; });

  auto record = [&](double dt) {
    report.records.push_back(
        {report.steps, w.time(), dt, l2_norm_squared(w), constraint_distance(k, w)});
    if (cfg.keep_history) report.history.push_back(w);
  };

  const double time_slack = 1e-12 * cfg.final_time;
  std::size_t next_stop = 0;
  try {
    record(0.0);
    report.snapshots.push_back(w);
    while (next_stop < stops.size()) {
      const double target = stops[next_stop];
      double dt = stable_dt(sys, g, cfg, target - w.time());
      bool hits_stop = w.time() + dt >= target - time_slack;
      if (hits_stop) dt = target - w.time();

      w = strang_step(sys, k, w, cfg, dt);
      if (hits_stop) w.set_time(target);
      w.check_finite();
      ++report.steps;

      if (hits_stop || report.steps % static_cast<std::size_t>(cfg.record_every) == 0) record(dt);
      if (hits_stop) {
        report.snapshots.push_back(w);
        ++next_stop;
      }
    }
    report.complete = true;
  } catch (const Error& e) {
    report.complete = false;
    report.error = e.what();
  }
  return report;
}

RunReport parabolic_run(const FriedrichsSystem& sys, const ConvexSet& k, const Field& initial,
                        const SolverConfig& cfg) {
  require(cfg.eta > 0.0, "parabolic run needs eta > 0");
  return run(sys, k, initial, cfg);
}

}  // namespace cfrelax
