#pragma once

// Numerical checks of the properties the relaxed solutions are known to have:
// the entropy-type integral inequality against constants in K, energy decay,
// L2 contraction on cones, finite propagation speed, and the epsilon / eta /
// data-mollification convergence studies.

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cfrelax/convex.hpp"
#include "cfrelax/grid.hpp"
#include "cfrelax/solver.hpp"
#include "cfrelax/system.hpp"

namespace cfrelax {

/// phi(t,x) = (T-t)/T + (r-|x|)/(nLT)  for r <= |x| <= r + nL(T-t),
///            (T-t)/T                  for |x| <= r,   0 otherwise.
struct ConeWeight {
  double r;
  double speed;
  double horizon;
  int dim;
};

/// phi(t,x) = amplitude * cos^2(pi s / 2) * (T-t)/T,  s = |x - center| / radius < 1.
struct BumpWeight {
  Point center;
  double radius;
  double amplitude;
  double horizon;
  int dim;
};

/// Nonnegative Lipschitz weight supported in [0,T) x (ball). Vanishes for t >= T.
class TestFunction {
 public:
  using Kind = std::variant<ConeWeight, BumpWeight>;

  explicit TestFunction(Kind kind);

  double operator()(double t, const Point& x) const;
  const Kind& kind() const { return kind_; }
  double horizon() const;
  /// Radius of the spatial support ball (around the bump centre / origin).
  double support_radius() const;
  /// Lebesgue measure of the spatial support.
  double support_measure() const;
  std::string describe() const;

 private:
  Kind kind_;
};

TestFunction cone_test_function(double r, double speed, double horizon, int dim = 1);
TestFunction bump_test_function(Point center, double radius, double amplitude, double horizon,
                                int dim = 1);

struct EntropyReport {
  Vector kappa;
  std::string phi;
  double value = 0.0;
  double budget = 0.0;
  bool pass = false;
};

inline constexpr double kEntropyBudgetConstant = 4.0;

/// Space-time quadrature of
///   int int |W-k|^2 dphi/dt + sum_j <W-k; B_j (W-k)> dphi/dx_j  +  int |W0-k|^2 phi(0, .)
/// over recorded fields (trapezoid in time, midpoint in space, centred
/// differences for phi). Passes iff value >= -budget, with
/// budget = C (h + dt_rec) ||W-k||_inf^2 (1 + L) |supp phi|.
EntropyReport entropy_residual(std::span<const Field> history, const Field& initial,
                               std::span<const double> kappa, const TestFunction& phi,
                               const FriedrichsSystem& sys, const ConvexSet& k,
                               double budget_constant = kEntropyBudgetConstant);

/// Finite sample of constants in K: the anchor, anchor +- 0.9 margin along
/// every bounded axis, and the boundary point of K along each such axis.
std::vector<Vector> sample_kappas(const ConvexSet& k);

/// Three cones (radii r_max/4, r_max/2, r_max) plus `bumps` random interior
/// bumps drawn from a seeded generator.
std::vector<TestFunction> sample_test_functions(const Grid& grid, double speed, double horizon,
                                                std::uint64_t seed, int bumps = 5);

struct EnergyVerdict {
  bool pass = false;
  double max_uptick = 0.0;  ///< largest relative step-to-step increase
};

EnergyVerdict energy_check(const RunReport& report, double slack = 1e-12);

struct ContractionRow {
  double t;
  double radius;  ///< r of the inner ball; infinity for the global check
  double lhs;     ///< ||W(t) - W~(t)|| on B(0, r)
  double rhs;     ///< ||W0 - W~0|| on B(0, r + nLT)
  double tolerance;
  bool pass;
};

struct ContractionReport {
  std::vector<ContractionRow> rows;
  /// int_0^T int_{B(0,r)} |W - W~|^2  vs  T int_{B(0, r + nLT)} |W0 - W~0|^2, per radius.
  std::vector<double> space_time_lhs;
  std::vector<double> space_time_rhs;
  bool pass = false;
};

/// Runs both data sets with `cfg` (history kept) and compares. Local balls
/// use tolerance local_tol; the global comparison uses 1e-10.
ContractionReport contraction_check(const FriedrichsSystem& sys, const ConvexSet& k,
                                    const Field& w0, const Field& w0_other,
                                    const SolverConfig& cfg, std::span<const double> radii,
                                    double local_tol);
ContractionReport compare_runs(const RunReport& a, const RunReport& b, const FriedrichsSystem& sys,
                               std::span<const double> radii, double local_tol);

/// Cells of slack allowed beyond r0 + nLt after `steps` steps: the stencil
/// bound `steps`, capped by a 7-sigma estimate of the scheme's spread.
int stencil_margin(std::size_t steps, double speed, double eta);

struct FiniteSpeedRow {
  double t;
  double radius;
  double outside;
  bool pass;
};

struct FiniteSpeedReport {
  std::vector<FiniteSpeedRow> rows;
  bool pass = false;
};

/// For every recorded field: L2 mass outside B(0, r0 + nLt + margin h)
/// <= 1e-10 ||W0||. Throws SupportPrecheckFailed when W0 leaves B(0, r0).
FiniteSpeedReport finite_speed_check(const RunReport& report, double r0, double speed);

/// sqrt of the trapezoid-in-time integral of ||a(t) - b(t)||^2 over omega.
double space_time_distance(std::span<const Field> a, std::span<const Field> b,
                           const Region& omega);

struct EpsilonStudy {
  std::vector<double> epsilons;
  std::vector<double> differences;   ///< d_k between epsilon_k and epsilon_{k+1}
  std::vector<double> max_violation;  ///< sup_t dist(K, W_eps)
  std::vector<RunReport> runs;
  bool pass = false;
};

/// Passes when the differences and the violations both strictly decrease
/// (runs of exact zeros count) and the last violation is at most a tenth of
/// the first.
EpsilonStudy epsilon_cauchy_study(const FriedrichsSystem& sys, const ConvexSet& k,
                                  const Field& w0, const SolverConfig& cfg,
                                  std::span<const double> epsilons, const Region& omega);

struct EtaStudy {
  std::vector<double> etas;
  std::vector<double> distances;  ///< ||W_{eps,eta} - W_eps|| in L2((0,T) x omega)
  bool pass = false;
};

/// Every run shares dt = stable step of the smallest eta. Passes when the
/// series strictly decreases (a run of exact zeros counts) and ends at or
/// below `final_ratio` times its start.
EtaStudy eta_study(const FriedrichsSystem& sys, const ConvexSet& k, const Field& w0,
                   const SolverConfig& cfg, std::span<const double> etas, const Region& omega,
                   double final_ratio = 0.5);

struct DataPair {
  double width_a;
  double width_b;
  double solution_distance;  ///< sup_t ||W_a(t) - W_b(t)||
  double data_distance;      ///< ||W0_a - W0_b||
  bool pass;
};

struct DataStudy {
  std::vector<DataPair> pairs;
  bool pass = false;
};

/// Mollifies rough data at each width, evolves without diffusion, and checks
/// sup_t ||W_a - W_b|| <= ||W0_a - W0_b|| (1 + 1e-10) for every pair.
DataStudy l2_data_relaxation_study(const FriedrichsSystem& sys, const ConvexSet& k,
                                   const Field& w0, const SolverConfig& cfg,
                                   std::span<const double> widths);

}  // namespace cfrelax
