#include "cfrelax/verify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "cfrelax/error.hpp"

namespace cfrelax {
namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorKind::BadParameter, message);
}

double radius_of(const Point& x, int dim) {
  return dim == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

double ball_measure(double r, int dim) {
  return dim == 1 ? 2.0 * r : std::numbers::pi * r * r;
}

// Trapezoid weights for sample times t_0 < ... < t_K.
std::vector<double> trapezoid_weights(std::span<const Field> fields) {
  std::vector<double> w(fields.size(), 0.0);
  for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
    const double span = fields[k + 1].time() - fields[k].time();
    w[k] += 0.5 * span;
    w[k + 1] += 0.5 * span;
  }
  return w;
}

double max_spacing(std::span<const Field> fields) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < fields.size(); ++k)
    s = std::max(s, fields[k + 1].time() - fields[k].time());
  return s;
}

// Runs every config concurrently; results keep the input order.
std::vector<RunReport> run_all(const FriedrichsSystem& sys, const ConvexSet& k,
                               const std::vector<Field>& data,
                               const std::vector<SolverConfig>& configs) {
  std::vector<std::future<RunReport>> jobs;
  jobs.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i)
    jobs.push_back(std::async(std::launch::async, [&, i] { return run(sys, k, data[i], configs[i]); }));
  std::vector<RunReport> out;
  out.reserve(jobs.size());
  for (auto& job : jobs) {
    out.push_back(job.get());
    if (!out.back().complete) throw Error(ErrorKind::BadParameter, "study run failed: " + out.back().error);
  }
  return out;
}

// Absolute slack for comparisons whose right side can be exactly zero
// (identical or constant data), where the left side is pure rounding.
double rounding_floor(const Field& a, const Field& b) {
  return 64.0 * std::numeric_limits<double>::epsilon() * (l2_norm(a) + l2_norm(b));
}

bool strictly_decreasing(std::span<const double> v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i + 1] < v[i])) return false;
  return true;
}

// Strictly decreasing, except that a series already at exactly zero may stay
// there: zero data gives identical runs and nothing left to converge.
bool converging(std::span<const double> v) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (!(v[i + 1] < v[i]) && !(v[i] == 0.0 && v[i + 1] == 0.0)) return false;
  return true;
}

}  // namespace

TestFunction::TestFunction(Kind kind) : kind_(std::move(kind)) {
  std::visit(
      [](const auto& w) {
        using T = std::decay_t<decltype(w)>;
        require(w.dim == 1 || w.dim == 2, "test function dimension must be 1 or 2");
        require(w.horizon > 0.0, "test function horizon must be > 0");
        if constexpr (std::is_same_v<T, ConeWeight>) {
          require(w.r > 0.0 && w.speed > 0.0, "cone needs r > 0 and L > 0");
        } else {
          require(w.radius > 0.0 && w.amplitude >= 0.0, "bump needs radius > 0, amplitude >= 0");
        }
      },
      kind_);
}

double TestFunction::operator()(double t, const Point& x) const {
  return std::visit(
      [&](const auto& w) -> double {
        using T = std::decay_t<decltype(w)>;
        if (t >= w.horizon) return 0.0;
        const double time_factor = (w.horizon - t) / w.horizon;
        if constexpr (std::is_same_v<T, ConeWeight>) {
          const double rho = radius_of(x, w.dim);
          if (rho <= w.r) return time_factor;
          const double reach = w.dim * w.speed;
          if (rho <= w.r + reach * (w.horizon - t))
            return time_factor + (w.r - rho) / (reach * w.horizon);
          return 0.0;
        } else {
          const Point d{x[0] - w.center[0], w.dim == 2 ? x[1] - w.center[1] : 0.0};
          const double s = radius_of(d, w.dim) / w.radius;
          if (s >= 1.0) return 0.0;
          const double c = std::cos(0.5 * std::numbers::pi * s);
          return w.amplitude * c * c * time_factor;
        }
      },
      kind_);
}

double TestFunction::horizon() const {
  return std::visit([](const auto& w) { return w.horizon; }, kind_);
}

double TestFunction::support_radius() const {
  return std::visit(
      [](const auto& w) -> double {
        if constexpr (std::is_same_v<std::decay_t<decltype(w)>, ConeWeight>)
          return w.r + w.dim * w.speed * w.horizon;
        else
          return w.radius;
      },
      kind_);
}

double TestFunction::support_measure() const {
  return std::visit([this](const auto& w) { return ball_measure(support_radius(), w.dim); }, kind_);
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  std::visit(
      [&](const auto& w) {
        if constexpr (std::is_same_v<std::decay_t<decltype(w)>, ConeWeight>)
          os << "cone(r=" << format_double(w.r) << ";L=" << format_double(w.speed)
             << ";T=" << format_double(w.horizon) << ")";
        else
          os << "bump(c=" << format_double(w.center[0])
             << (w.dim == 2 ? ":" + format_double(w.center[1]) : std::string())
             << ";R=" << format_double(w.radius) << ";T=" << format_double(w.horizon) << ")";
      },
      kind_);
  return os.str();
}

TestFunction cone_test_function(double r, double speed, double horizon, int dim) {
  return TestFunction(ConeWeight{r, speed, horizon, dim});
}

TestFunction bump_test_function(Point center, double radius, double amplitude, double horizon,
                                int dim) {
  return TestFunction(BumpWeight{center, radius, amplitude, horizon, dim});
}

EntropyReport entropy_residual(std::span<const Field> history, const Field& initial,
                               std::span<const double> kappa, const TestFunction& phi,
                               const FriedrichsSystem& sys, const ConvexSet& k,
                               double budget_constant) {
  if (kappa.size() != k.dim() || !contains(k, kappa, 1e-12))
    throw Error(ErrorKind::KappaOutsideK, "kappa must lie in the constraint set");
  require(history.size() >= 2, "entropy residual needs at least two recorded fields");
  for (const auto& f : history)
    require(f.same_layout(initial), "history fields must share the initial layout");

  const Grid& g = initial.grid();
  const int dim = g.dim();
  const std::size_t m = initial.components();
  const double h = g.spacing();
  const double dt_rec = max_spacing(history);
  const double dt_fd = 0.5 * dt_rec;
  const auto weights = trapezoid_weights(history);

  std::vector<double> diff(m), bd(m), terms(g.cell_count());
  double scale = 0.0;
  auto local = [&](std::span<const double> w) {
    for (std::size_t i = 0; i < m; ++i) diff[i] = w[i] - kappa[i];
    const double e = dot(diff, diff);
    scale = std::max(scale, e);
    return e;
  };

  std::vector<double> per_time(history.size());
  for (std::size_t n = 0; n < history.size(); ++n) {
    const Field& w = history[n];
    const double t = w.time();
    for (std::size_t c = 0; c < g.cell_count(); ++c) {
      const Point x = g.position(c);
      const double e = local(w.at(c));
      const double phi_t = (phi(t + dt_fd, x) - phi(t - dt_fd, x)) / (2.0 * dt_fd);
      double term = e * phi_t;
      for (int j = 0; j < dim; ++j) {
        Point xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const double phi_j = (phi(t, xp) - phi(t, xm)) / (2.0 * h);
        if (phi_j == 0.0) continue;
        multiply(sys.matrix(static_cast<std::size_t>(j)), diff, bd);
        term += dot(diff, bd) * phi_j;
      }
      terms[c] = term;
    }
    per_time[n] = weights[n] * pairwise_sum(terms) * g.cell_volume();
  }

  for (std::size_t c = 0; c < g.cell_count(); ++c)
    terms[c] = local(initial.at(c)) * phi(0.0, g.position(c));
  const double initial_term = pairwise_sum(terms) * g.cell_volume();

  EntropyReport report;
  report.kappa.assign(kappa.begin(), kappa.end());
  report.phi = phi.describe();
  report.value = pairwise_sum(per_time) + initial_term;
  report.budget = budget_constant * (h + dt_rec) * scale * (1.0 + sys.speed_bound()) *
                  phi.support_measure();
  report.pass = report.value >= -report.budget;
  return report;
}

std::vector<Vector> sample_kappas(const ConvexSet& k) {
  const Vector& anchor = k.anchor();
  const double margin = k.anchor_margin();
  const double far = 1e3 * (1.0 + margin + norm(anchor));
  std::vector<Vector> out{anchor};
  for (std::size_t axis = 0; axis < k.dim(); ++axis) {
    std::optional<Vector> boundary;
    for (double sign : {1.0, -1.0}) {
      Vector probe = anchor;
      probe[axis] += sign * far;
      if (distance(k, probe) > 0.0 && !boundary) boundary = project(k, probe);
    }
    if (!boundary) continue;
    for (double sign : {1.0, -1.0}) {
      Vector inner = anchor;
      inner[axis] += sign * 0.9 * margin;
      out.push_back(std::move(inner));
    }
    out.push_back(std::move(*boundary));
  }
  return out;
}

std::vector<TestFunction> sample_test_functions(const Grid& grid, double speed, double horizon,
                                                std::uint64_t seed, int bumps) {
  const int dim = grid.dim();
  const double cone_speed = speed > 0.0 ? speed : 1.0;
  const double x = grid.half_width();
  const double r_max = std::max(x - dim * cone_speed * horizon, 0.25 * x);
  std::vector<TestFunction> out;
  for (double frac : {0.25, 0.5, 1.0}) out.push_back(cone_test_function(frac * r_max, cone_speed, horizon, dim));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(-0.5 * x, 0.5 * x);
  std::uniform_real_distribution<double> radius(0.1 * x, 0.4 * x);
  for (int b = 0; b < bumps; ++b) {
    Point c{centre(rng), dim == 2 ? centre(rng) : 0.0};
    out.push_back(bump_test_function(c, radius(rng), 1.0, horizon, dim));
  }
  return out;
}

EnergyVerdict energy_check(const RunReport& report, double slack) {
  EnergyVerdict v;
  if (!report.complete || report.records.empty()) return v;
  const double e0 = report.records.front().energy;
  bool bounded = true;
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const double e = report.records[i].energy;
    bounded = bounded && e <= e0 * (1.0 + slack);
    if (i == 0) continue;
    const double prev = report.records[i - 1].energy;
    double uptick = 0.0;
    if (prev > 0.0)
      uptick = (e - prev) / prev;
    else if (e > 0.0)
      uptick = std::numeric_limits<double>::infinity();
    v.max_uptick = std::max(v.max_uptick, uptick);
  }
  v.pass = bounded && v.max_uptick <= slack;
  return v;
}

ContractionReport compare_runs(const RunReport& a, const RunReport& b, const FriedrichsSystem& sys,
                               std::span<const double> radii, double local_tol) {
  require(a.complete && b.complete, "contraction needs complete runs");
  require(a.history.size() == b.history.size() && !a.history.empty(),
          "contraction needs matching recorded histories");
  const Field& w0 = *a.initial;
  const Field& v0 = *b.initial;
  const int dim = w0.grid().dim();
  const double horizon = a.config.final_time;
  const double reach = dim * sys.speed_bound() * horizon;

  ContractionReport report;
  report.pass = true;
  const double global_rhs = l2_distance(w0, v0);
  const double floor = rounding_floor(w0, v0);
  for (std::size_t n = 0; n < a.history.size(); ++n) {
    const double t = a.history[n].time();
    require(std::abs(t - b.history[n].time()) <= 1e-12 * (1.0 + horizon), "run times differ");
    const double lhs = l2_distance(a.history[n], b.history[n]);
    const bool ok = lhs <= global_rhs * (1.0 + 1e-10) + floor;
    report.rows.push_back({t, std::numeric_limits<double>::infinity(), lhs, global_rhs, 1e-10, ok});
    report.pass = report.pass && ok;
    for (double r : radii) {
      const double l = l2_distance(a.history[n], b.history[n], region::Ball{r});
      const double rhs = l2_distance(w0, v0, region::Ball{r + reach});
      const bool pass = l <= rhs * (1.0 + local_tol);
      report.rows.push_back({t, r, l, rhs, local_tol, pass});
      report.pass = report.pass && pass;
    }
  }
  for (double r : radii) {
    const double lhs = std::pow(space_time_distance(a.history, b.history, region::Ball{r}), 2);
    const double rhs = horizon * std::pow(l2_distance(w0, v0, region::Ball{r + reach}), 2);
    report.space_time_lhs.push_back(lhs);
    report.space_time_rhs.push_back(rhs);
  }
  return report;
}

ContractionReport contraction_check(const FriedrichsSystem& sys, const ConvexSet& k,
                                    const Field& w0, const Field& w0_other,
                                    const SolverConfig& cfg, std::span<const double> radii,
                                    double local_tol) {
  SolverConfig c = cfg;
  c.keep_history = true;
  auto runs = run_all(sys, k, {w0, w0_other}, {c, c});
  return compare_runs(runs[0], runs[1], sys, radii, local_tol);
}

int stencil_margin(std::size_t steps, double speed, double eta) {
  if (speed == 0.0 && eta == 0.0) return 0;
  const double spread = 7.0 * std::sqrt(static_cast<double>(steps)) + 4.0;
  return static_cast<int>(std::min<double>(static_cast<double>(steps), std::ceil(spread)));
}

FiniteSpeedReport finite_speed_check(const RunReport& report, double r0, double speed) {
  require(report.initial.has_value(), "finite speed check needs the initial field");
  const Field& w0 = *report.initial;
  const Grid& g = w0.grid();
  const double r_start = r0 + 4.0 * report.config.mollifier_width();
  if (l2_norm(w0, region::Annulus{r_start, std::numeric_limits<double>::infinity()}) > 0.0)
    throw Error(ErrorKind::SupportPrecheckFailed, "initial data not supported in B(0, r0)");

  const double bound = 1e-10 * l2_norm(w0);
  const bool use_history = !report.history.empty();
  std::span<const Field> fields = use_history ? std::span<const Field>(report.history)
                                              : std::span<const Field>(report.snapshots);
  FiniteSpeedReport out;
  out.pass = true;
  for (std::size_t n = 0; n < fields.size(); ++n) {
    const double t = fields[n].time();
    std::size_t steps = report.steps;
    if (use_history) {
      steps = report.records[n].step;
    } else {
      for (const auto& r : report.records)
        if (r.t == t) steps = r.step;
    }
    const double radius = r_start + g.dim() * speed * t +
                          stencil_margin(steps, speed, report.config.eta) * g.spacing();
    const double outside =
        l2_norm(fields[n], region::Annulus{radius, std::numeric_limits<double>::infinity()});
    const bool pass = outside <= bound;
    out.rows.push_back({t, radius, outside, pass});
    out.pass = out.pass && pass;
  }
  return out;
}

double space_time_distance(std::span<const Field> a, std::span<const Field> b, const Region& omega) {
  require(a.size() == b.size(), "histories differ in length");
  const auto weights = trapezoid_weights(a);
  std::vector<double> terms(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    require(std::abs(a[n].time() - b[n].time()) <= 1e-12 * (1.0 + std::abs(a[n].time())),
            "histories differ in time grid");
    const double d = l2_distance(a[n], b[n], omega);
    terms[n] = weights[n] * d * d;
  }
  return std::sqrt(pairwise_sum(terms));
}

EpsilonStudy epsilon_cauchy_study(const FriedrichsSystem& sys, const ConvexSet& k,
                                  const Field& w0, const SolverConfig& cfg,
                                  std::span<const double> epsilons, const Region& omega) {
  require(epsilons.size() >= 2, "epsilon study needs at least two values");
  require(strictly_decreasing(epsilons), "epsilons must be strictly decreasing");
  std::vector<SolverConfig> configs;
  for (double eps : epsilons) {
    SolverConfig c = cfg;
    c.epsilon = eps;
    c.keep_history = true;
    configs.push_back(c);
  }
  EpsilonStudy study;
  study.epsilons.assign(epsilons.begin(), epsilons.end());
  study.runs = run_all(sys, k, std::vector<Field>(configs.size(), w0), configs);
  for (std::size_t i = 0; i + 1 < study.runs.size(); ++i)
    study.differences.push_back(space_time_distance(study.runs[i].history, study.runs[i + 1].history, omega));
  for (const auto& r : study.runs) {
    double sup = 0.0;
    for (std::size_t n = 1; n < r.records.size(); ++n) sup = std::max(sup, r.records[n].constraint_dist);
    study.max_violation.push_back(sup);
  }
  study.pass = converging(study.differences) && converging(study.max_violation) &&
               study.max_violation.back() <= 0.1 * study.max_violation.front();
  return study;
}

EtaStudy eta_study(const FriedrichsSystem& sys, const ConvexSet& k, const Field& w0,
                   const SolverConfig& cfg, std::span<const double> etas, const Region& omega,
                   double final_ratio) {
  require(!etas.empty(), "eta study needs at least one value");
  require(strictly_decreasing(etas), "etas must be strictly decreasing");
  const double h = w0.grid().spacing();
  for (double eta : etas) require(eta >= h * (1.0 - 1e-12), "every eta must be >= h");

  SolverConfig base = cfg;
  base.eta = 0.0;
  base.mollifier = 0.0;
  base.keep_history = true;
  std::vector<SolverConfig> configs{base};
  for (double eta : etas) {
    SolverConfig c = base;
    c.eta = eta;
    c.mollifier = eta;
    configs.push_back(c);
  }
  double dt = std::numeric_limits<double>::infinity();
  for (const auto& c : configs) dt = std::min(dt, stable_dt(sys, w0.grid(), c, c.final_time));
  for (auto& c : configs) c.max_dt = cfg.max_dt ? std::min(*cfg.max_dt, dt) : dt;

  const auto runs = run_all(sys, k, std::vector<Field>(configs.size(), w0), configs);
  EtaStudy study;
  study.etas.assign(etas.begin(), etas.end());
  for (std::size_t i = 1; i < runs.size(); ++i)
    study.distances.push_back(space_time_distance(runs[i].history, runs[0].history, omega));
  study.pass = converging(study.distances) &&
               study.distances.back() <= final_ratio * study.distances.front();
  return study;
}

DataStudy l2_data_relaxation_study(const FriedrichsSystem& sys, const ConvexSet& k,
                                   const Field& w0, const SolverConfig& cfg,
                                   std::span<const double> widths) {
  require(!widths.empty(), "data study needs at least one width");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i)
    require(widths[i + 1] <= widths[i], "widths must be decreasing");

  SolverConfig base = cfg;
  base.eta = 0.0;
  base.mollifier = 0.0;
  base.keep_history = true;
  std::vector<Field> data;
  for (double w : widths) data.push_back(w > 0.0 ? mollify(w0, w, cfg.boundary) : w0);
  double dt = std::numeric_limits<double>::infinity();
  for (const auto& d : data) {
    support_precheck(sys, d, base);
    dt = std::min(dt, stable_dt(sys, d.grid(), base, base.final_time));
  }
  base.max_dt = cfg.max_dt ? std::min(*cfg.max_dt, dt) : dt;
  const auto runs = run_all(sys, k, data, std::vector<SolverConfig>(data.size(), base));

  DataStudy study;
  study.pass = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      double sup = 0.0;
      for (std::size_t n = 0; n < runs[i].history.size(); ++n)
        sup = std::max(sup, l2_distance(runs[i].history[n], runs[j].history[n]));
      const double initial = l2_distance(data[i], data[j]);
      const bool pass = sup <= initial * (1.0 + 1e-10) + rounding_floor(data[i], data[j]);
      study.pairs.push_back({widths[i], widths[j], sup, initial, pass});
      study.pass = study.pass && pass;
    }
  }
  return study;
}

}  // namespace cfrelax
