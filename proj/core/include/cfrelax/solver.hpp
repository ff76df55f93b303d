#pragma once

// Time integration of the relaxed system
//   dW/dt + sum_j B_j dW/dx_j - eta Lap W = (P_K(W) - W) / epsilon
// by Strang splitting: half relaxation, transport, diffusion, half relaxation.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cfrelax/convex.hpp"
#include "cfrelax/grid.hpp"
#include "cfrelax/system.hpp"

namespace cfrelax {

enum class Scheme { Upwind, Rusanov };
enum class RelaxationMethod { Exact, ImplicitEuler };

struct SolverConfig {
  double epsilon = 1.0;
  double eta = 0.0;
  double final_time = 1.0;
  double cfl = 0.9;
  Scheme scheme = Scheme::Upwind;
  RelaxationMethod relaxation = RelaxationMethod::Exact;
  GhostFill boundary = GhostFill::Zero;
  std::vector<double> snapshot_times;
  int record_every = 1;
  /// Width of the initial-data mollifier; defaults to eta when eta > 0.
  std::optional<double> mollifier;
  /// Caps the step so runs with different eta share one time grid.
  std::optional<double> max_dt;
  /// Keep every recorded field (needed for space-time integrals).
  bool keep_history = false;

  /// Throws BadParameter on the first violated invariant.
  void validate() const;
  double mollifier_width() const;
};

struct StepRecord {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  double energy = 0.0;           ///< ||W(t)||^2 over the grid
  double constraint_dist = 0.0;  ///< max over cells of dist(K, W)
};

struct RunReport {
  SolverConfig config;
  std::vector<StepRecord> records;
  std::vector<Field> snapshots;  ///< t = 0, each snapshot time, and T
  std::vector<Field> history;    ///< one field per record when keep_history
  std::optional<Field> initial;  ///< data actually evolved (after mollification)
  double data_energy = 0.0;      ///< ||W0||^2 before mollification
  std::size_t steps = 0;
  bool complete = false;
  std::string error;

  /// sup_t ||W(t)||^2 <= ||W0||^2 (1 + 1e-12) over all records.
  bool energy_bounded_by_data() const;
  double max_constraint_distance() const;
};

/// Largest stable step, truncated to `remaining` and cfg.max_dt.
double stable_dt(const FriedrichsSystem& sys, const Grid& grid, const SolverConfig& cfg,
                 double remaining);

/// Dimensionally split first-order upwinding in characteristic variables.
Field upwind_step(const FriedrichsSystem& sys, const Field& f, double dt,
                  GhostFill ghost = GhostFill::Zero);
/// Unsplit Rusanov flux with dissipation coefficient L on every face.
Field rusanov_step(const FriedrichsSystem& sys, const Field& f, double dt,
                   GhostFill ghost = GhostFill::Zero);
/// Explicit 3-point-per-axis Laplacian update.
Field diffusion_step(const Field& f, double eta, double dt, GhostFill ghost = GhostFill::Zero);

/// Exact solution of dW/dt = (P_K(W) - W)/epsilon over [0, dt]:
/// W+ = p + (W - p) exp(-dt/epsilon), p = P_K(W). The projection is constant
/// on the segment [p, W], so the ODE is linear along the trajectory.
Field relaxation_step_exact(const ConvexSet& k, const Field& f, double epsilon, double dt);
/// Backward Euler for the same ODE, (W + (dt/eps) p) / (1 + dt/eps).
Field relaxation_step_implicit(const ConvexSet& k, const Field& f, double epsilon, double dt);

Field transport_step(const FriedrichsSystem& sys, const Field& f, const SolverConfig& cfg,
                     double dt);
Field strang_step(const FriedrichsSystem& sys, const ConvexSet& k, const Field& f,
                  const SolverConfig& cfg, double dt);

/// max over cells of dist(K, W(x)).
double constraint_distance(const ConvexSet& k, const Field& f);

/// Throws SupportPrecheckFailed unless
/// support(W0) + n L T + 4 * mollifier + 8 h <= X (zero ghost fill only).
void support_precheck(const FriedrichsSystem& sys, const Field& initial, const SolverConfig& cfg);

/// Advances W0 to T. Precondition failures throw; failures during stepping
/// return a partial report with complete == false.
RunReport run(const FriedrichsSystem& sys, const ConvexSet& k, const Field& initial,
              const SolverConfig& cfg);
/// run() with eta > 0 required.
RunReport parabolic_run(const FriedrichsSystem& sys, const ConvexSet& k, const Field& initial,
                        const SolverConfig& cfg);

}  // namespace cfrelax
