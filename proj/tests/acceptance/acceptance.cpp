// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <cfloat>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfrelax/convex.hpp"
#include "cfrelax/initial_data.hpp"
#include "cfrelax/solver.hpp"
#include "cfrelax/system.hpp"
#include "cfrelax/verify.hpp"
#include "config.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

using namespace cfrelax;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// The elastoplastic Riemann demo: mu = 1, sigma_y = 0.5, velocity jump
// (1 | -1), stress-free, on [-2, 2] with N = 512, T = 0.5.
struct Demo {
  ModelInstance model = build(model::ElastoPlastic1D{1.0, 0.5});
  Grid grid{1, 2.0, 512};
  Field w0 = make_initial(grid, preset::Riemann{{1.0, 0.0}, {-1.0, 0.0}, 0.0, 1.0});

  SolverConfig config(double epsilon) const {
    SolverConfig c;
    c.epsilon = epsilon;
    c.final_time = 0.5;
    c.keep_history = true;
    return c;
  }
  const ConvexSet& k() const { return *model.constraint; }
};

const Demo& demo() {
  static const Demo d;
  return d;
}

Outcome energy_bound() {
  const auto& d = demo();
  const RunReport r = run(d.model.system, d.k(), d.w0, d.config(0.01));
  double uptick = 0.0;
  for (std::size_t n = 1; n < r.records.size(); ++n)
    uptick = std::max(uptick, (r.records[n].energy - r.records[n - 1].energy) / r.records[n - 1].energy);
  const double first = r.records.front().energy, last = r.records.back().energy;
  const bool pass = r.complete && uptick <= 1e-12 && last <= first;
  return {pass, "max uptick " + num(uptick) + ", energy " + num(first) + " -> " + num(last)};
}

// Distances written out here, independent of the library's projections.
double dist_ball(const Vector& c, double r, const Vector& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
  return std::max(0.0, std::sqrt(s) - r);
}
double dist_box(const Vector& lo, const Vector& hi, const Vector& x) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
    s += e * e;
  }
  return std::sqrt(s);
}

Outcome relaxation_law() {
  std::mt19937_64 rng(20240601);
  auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  double worst = 0.0;
  int states = 0, floor_bound = 0;
  while (states < 1000) {
    const std::size_t m = 1 + rng() % 3;
    const int kind = static_cast<int>(rng() % 2);
    Vector c(m), lo(m), hi(m);
    for (std::size_t i = 0; i < m; ++i) {
      c[i] = u(-1, 1);
      lo[i] = c[i] - u(0.2, 1.5);
      hi[i] = c[i] + u(0.2, 1.5);
    }
    const double radius = u(0.2, 2.0);
    const ConvexSet k = kind == 0 ? ConvexSet::ball(c, radius, {.anchor = c}) : ConvexSet::box(lo, hi, {.anchor = c});
    const double eps = std::pow(10.0, u(-4, 0)), dt = std::pow(10.0, u(-4, 0));

    Field f(Grid(1, 1.0, 4), m);
    for (std::size_t cell = 0; cell < 4; ++cell) {
      Vector w(m);
      for (auto& x : w) x = u(-5, 5);
      f.store(cell, w);
    }
    const Field g = relaxation_step_exact(k, f, eps, dt);
    for (std::size_t cell = 0; cell < 4; ++cell, ++states) {
      const Vector before(f.at(cell).begin(), f.at(cell).end()), after(g.at(cell).begin(), g.at(cell).end());
      const double d0 = kind == 0 ? dist_ball(c, radius, before) : dist_box(lo, hi, before);
      const double d1 = kind == 0 ? dist_ball(c, radius, after) : dist_box(lo, hi, after);
      const double expected = std::exp(-dt / eps) * d0;
      // Both distances are differences of O(1) quantities, so they carry an
      // absolute rounding error of a few ulps of the state scale; 1e-12
      // relative is checked on top of that floor.
      const double floor = 8 * DBL_EPSILON * (1 + norm(before) + norm(c) + (kind == 0 ? radius : norm(hi) + norm(lo)));
      if (expected < 1e4 * floor) ++floor_bound;
      const double err = std::abs(d1 - expected) / (1e-12 * expected + floor);
      worst = std::max(worst, err);
    }
  }
  return {worst <= 1.0, std::to_string(states) + " states (" + std::to_string(floor_bound) +
                            " below 1e4 ulps after relaxation), worst error / (1e-12 rel + rounding floor) " + num(worst)};
}

Outcome entropy_inequality() {
  const auto& d = demo();
  const auto kappas = sample_kappas(d.k());
  const auto phis = sample_test_functions(d.grid, d.model.system.speed_bound(), 0.5, 7);
  int pairs = 0, failures = 0;
  double worst = INFINITY;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const RunReport r = run(d.model.system, d.k(), d.w0, d.config(eps));
    if (!r.complete) return {false, "run at eps " + num(eps) + " stopped: " + r.error};
    for (const auto& kappa : kappas)
      for (const auto& phi : phis) {
        const auto e = entropy_residual(r.history, *r.initial, kappa, phi, d.model.system, d.k());
        ++pairs;
        if (!(e.value >= -e.budget)) ++failures;
        if (e.budget > 0) worst = std::min(worst, e.value / e.budget);
      }
  }
  return {failures == 0, std::to_string(pairs) + " (kappa, phi) pairs, " + std::to_string(failures) +
                             " failures, min value/budget " + num(worst)};
}

Outcome contraction() {
  const auto& d = demo();
  const double h = d.grid.spacing(), r = 1.0, reach = 1.0 * 1.0 * 0.5;  // n L T
  const Field shifted = shift(d.w0, {1, 0});
  const RunReport a = run(d.model.system, d.k(), d.w0, d.config(0.01));
  const RunReport b = run(d.model.system, d.k(), shifted, d.config(0.01));
  if (!a.complete || !b.complete) return {false, "run stopped early"};
  const double rhs = l2_distance(d.w0, shifted, region::Ball{r + reach});
  double worst = 0.0;
  bool pass = a.history.size() == b.history.size();
  for (std::size_t n = 0; pass && n < a.history.size(); ++n) {
    const double lhs = l2_distance(a.history[n], b.history[n], region::Ball{r});
    pass = lhs <= rhs * (1 + 5 * h);
    worst = std::max(worst, lhs / rhs);
  }
  return {pass, std::to_string(a.history.size()) + " times, max ratio " + num(worst) + " vs 1+5h = " + num(1 + 5 * h)};
}

Outcome finite_speed() {
  const ModelInstance wave = build(model::Wave1D{1.0});
  const ConvexSet k = ConvexSet::ball({0.0, 0.0}, 1e3);
  const Grid g(1, 2.0, 512);
  const Field w0 = make_initial(g, preset::Bump{{0, 0}, 0.25, {1.0, 0.5}});
  SolverConfig cfg;
  cfg.epsilon = 0.01;
  cfg.final_time = 0.5;
  cfg.keep_history = true;
  const RunReport r = run(wave.system, k, w0, cfg);
  if (!r.complete) return {false, r.error};
  const double bound = 1e-10 * l2_norm(w0);
  double worst = 0.0;
  bool pass = support_radius(w0) <= 0.25;
  for (std::size_t n = 0; n < r.history.size(); ++n) {
    const double t = r.history[n].time();
    const double radius = 0.25 + t + stencil_margin(r.records[n].step, 1.0, 0.0) * g.spacing();
    const double outside = l2_norm(r.history[n], region::Annulus{radius, INFINITY});
    worst = std::max(worst, outside);
    pass = pass && outside <= bound;
  }
  return {pass, "max outside mass " + num(worst) + " vs " + num(bound)};
}

Outcome epsilon_convergence() {
  const auto& d = demo();
  const std::vector<double> eps{0.1, 0.05, 0.025, 0.0125};
  SolverConfig cfg = d.config(0.1);
  cfg.keep_history = false;
  const auto s = epsilon_cauchy_study(d.model.system, d.k(), d.w0, cfg, eps, region::Ball{1.0});
  bool diffs = true, viol = true;
  for (std::size_t i = 1; i < s.differences.size(); ++i) diffs = diffs && s.differences[i] < s.differences[i - 1];
  for (std::size_t i = 1; i < s.max_violation.size(); ++i) viol = viol && s.max_violation[i] < s.max_violation[i - 1];
  const double final_ratio = s.max_violation.back() / s.max_violation.front();

  // Observed on first run; a drift here means the numerics changed, not the criterion.
  const std::vector<double> pinned_diff_ratios{0.76978, 0.75603};
  const double pinned_final_ratio = 0.658312;
  bool pinned = std::abs(final_ratio - pinned_final_ratio) <= 1e-4;
  std::string ratios;
  for (std::size_t i = 1; i < s.differences.size(); ++i) {
    const double q = s.differences[i] / s.differences[i - 1];
    pinned = pinned && std::abs(q - pinned_diff_ratios[i - 1]) <= 1e-4;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.5f", q);
    ratios += (i > 1 ? ", " : "") + std::string(buf);
  }
  const bool pass = diffs && viol && final_ratio <= 0.1;
  return {pass, std::string("differences ") + (diffs ? "decreasing" : "NOT decreasing") + " (ratios " + ratios +
                    "), violations " + (viol ? "decreasing" : "NOT decreasing") + ", final/first violation " +
                    std::to_string(final_ratio) + " vs 0.1; pinned regression values " + (pinned ? "match" : "DRIFTED")};
}

Outcome eta_convergence() {
  const auto& d = demo();
  SolverConfig cfg = d.config(0.05);
  const std::vector<double> etas{0.04, 0.02, 0.01};
  const auto s = eta_study(d.model.system, d.k(), d.w0, cfg, etas, region::Ball{1.0});
  bool dec = true;
  for (std::size_t i = 1; i < s.distances.size(); ++i) dec = dec && s.distances[i] < s.distances[i - 1];
  const bool pass = dec && s.distances.back() <= 0.5 * s.distances.front();
  return {pass, "distances " + num(s.distances[0]) + ", " + num(s.distances[1]) + ", " + num(s.distances[2])};
}

Outcome unconstrained_consistency() {
  const ModelInstance wave = build(model::Wave1D{1.0});
  const ConvexSet k = ConvexSet::ball({0.0, 0.0}, 1e3);

  // Inactive constraint: relaxed run equals plain transport.
  double gap = 0.0;
  {
    const Grid g(1, 2.0, 256);
    const Field w0 = make_initial(g, preset::Bump{{0, 0}, 0.5, {1.0, -0.3}});
    SolverConfig cfg;
    cfg.epsilon = 1e-3;
    cfg.final_time = 0.5;
    cfg.keep_history = true;
    const RunReport r = run(wave.system, k, w0, cfg);
    Field f = w0;
    for (std::size_t n = 1; n < r.records.size(); ++n) {
      f = transport_step(wave.system, f, cfg, r.records[n].dt);
      for (std::size_t i = 0; i < f.values().size(); ++i)
        gap = std::max(gap, std::abs(f.values()[i] - r.history[n].values()[i]));
    }
  }

  // Exact d'Alembert solution. With B = [[0,-1],[-1,0]], a = v - w moves
  // right and b = v + w moves left at unit speed.
  auto profile = [](double x, double amp) {
    const double s = std::abs(x) / 0.5;
    return s < 1 ? amp * std::pow(std::cos(M_PI * s / 2), 2) : 0.0;
  };
  std::vector<double> errors;
  for (int n : {128, 256, 512}) {
    const Grid g(1, 2.0, n);
    const Field w0 = make_initial(g, preset::Bump{{0, 0}, 0.5, {1.0, -0.3}});
    SolverConfig cfg;
    cfg.epsilon = 1.0;
    cfg.final_time = 0.5;
    const RunReport r = run(wave.system, k, w0, cfg);
    const Field& w = r.snapshots.back();
    const double t = w.time();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = g.center(i);
      const double a = profile(x - t, 1.3), b = profile(x + t, 0.7);  // v0 - w0 = 1.3 bump, v0 + w0 = 0.7 bump
      const double v = (a + b) / 2, ww = (b - a) / 2;
      sum += g.spacing() * (std::pow(w.at(i)[0] - v, 2) + std::pow(w.at(i)[1] - ww, 2));
    }
    errors.push_back(std::sqrt(sum));
  }
  const double p1 = std::log2(errors[0] / errors[1]), p2 = std::log2(errors[1] / errors[2]);
  const bool pass = gap <= 1e-12 && p1 >= 0.8 && p2 >= 0.8;
  return {pass, "max |relaxed - transport| " + num(gap) + ", observed orders " + num(p1) + ", " + num(p2)};
}

Outcome projection_kernel() {
  using cfrelax::testing::PlanarSetGenerator;
  PlanarSetGenerator gen(9);
  constexpr double tol = kDefaultProjectionTolerance;
  int failures = 0;
  double worst_oracle = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const auto c = gen.any();
    const Vector x = gen.point(3.0), y = gen.point(3.0);
    const Vector px = project(c.set, x), py = project(c.set, y);
    const Vector dp{px[0] - py[0], px[1] - py[1]}, dx{x[0] - y[0], x[1] - y[1]};
    const double dxy = norm(dx);
    bool ok = norm(dp) <= dxy + 2 * tol;                            // nonexpansive
    ok = ok && dot(dp, dx) >= dot(dp, dp) - tol * (1 + dxy * dxy);  // firm
    ok = ok && distance(project(c.set, px), px) <= tol;             // idempotent
    for (const Vector& k : {c.set.anchor(), project(c.set, gen.point(3.0))}) {
      const double vi = (x[0] - px[0]) * (k[0] - px[0]) + (x[1] - px[1]) * (k[1] - px[1]);
      ok = ok && vi <= tol * (1 + norm(x));  // variational inequality
    }
    const auto& a = c.set.anchor();
    const auto oracle = cfrelax::testing::grid_search_projection(c.inside, {a[0], a[1]}, {x[0], x[1]});
    const double gap = oracle ? std::hypot((*oracle)[0] - px[0], (*oracle)[1] - px[1]) : INFINITY;
    worst_oracle = std::max(worst_oracle, gap);
    ok = ok && gap <= 2e-3;
    if (!ok) ++failures;
  }
  return {failures == 0, "10000 samples, " + std::to_string(failures) + " failures, worst grid-search gap " + num(worst_oracle)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / "cfrelax_acceptance";
  fs::remove_all(base);
  int configs = 0, files = 0, mismatches = 0;
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(CFRELAX_CONFIG_DIR)) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    const auto cfg = cli::parse_config(slurp(path));
    const fs::path a = base / path.stem() / "a", b = base / path.stem() / "b";
    const auto ra = cli::execute(cfg, {cli::Command::Run, a, nullptr});
    const auto rb = cli::execute(cfg, {cli::Command::Run, b, nullptr});
    if (!ra.error.empty()) return {false, path.filename().string() + ": " + ra.error};
    if (ra.outputs != rb.outputs) ++mismatches;
    for (const auto& p : ra.outputs) {
      if (fs::path(p).extension() != ".csv") continue;
      ++files;
      if (slurp(a / p) != slurp(b / p)) ++mismatches;
    }
    ++configs;
  }
  fs::remove_all(base);
  return {configs > 0 && mismatches == 0, std::to_string(configs) + " configs, " + std::to_string(files) +
                                              " CSVs compared, " + std::to_string(mismatches) + " mismatches"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"energy bound on the elastoplastic demo", energy_bound},
      {"exact relaxation law", relaxation_law},
      {"entropy inequality at eps 1e-1, 1e-2, 1e-3", entropy_inequality},
      {"L2 contraction for the shifted pair", contraction},
      {"finite speed of propagation", finite_speed},
      {"epsilon convergence study", epsilon_convergence},
      {"eta convergence study", eta_convergence},
      {"unconstrained consistency", unconstrained_consistency},
      {"projection kernel properties", projection_kernel},
      {"determinism of demo configs", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu: %s -- %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
