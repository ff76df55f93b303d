#include <doctest.h>

#include <cmath>
#include <random>

#include "cfrelax/error.hpp"
#include "cfrelax/initial_data.hpp"
#include "cfrelax/solver.hpp"
#include "oracles.hpp"

using namespace cfrelax;

namespace {

template <class Fn>
Field sample(const Grid& g, std::size_t m, Fn&& fn) {
  Field f(g, m);
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    const Point p = g.position(c);
    for (std::size_t k = 0; k < m; ++k) f.at(c)[k] = fn(p, k);
  }
  return f;
}

double bump(double x, double width = 0.5) {
  const double s = std::abs(x) / width;
  return s < 1 ? std::pow(std::cos(M_PI * s / 2), 2) : 0.0;
}

Field random_field(const Grid& g, std::size_t m, std::uint64_t seed, double amplitude = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  return sample(g, m, [&](Point, std::size_t) { return u(rng); });
}

double max_abs_difference(const Field& a, const Field& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.values().size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

template <class Fn>
ErrorKind thrown_kind(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ParseError;
}

const ConvexSet& huge_ball(std::size_t m) {
  static const ConvexSet one = ConvexSet::ball({0.0}, 1e3);
  static const ConvexSet two = ConvexSet::ball({0.0, 0.0}, 1e3);
  return m == 1 ? one : two;
}

}  // namespace

TEST_CASE("stable_dt") {
  const auto advect = build(model::Advection{{1.0}}).system;
  const Grid g(1, 1.0, 200);  // h = 0.01
  SolverConfig cfg;
  cfg.cfl = 0.9;
  CHECK(stable_dt(advect, g, cfg, 1.0) == doctest::Approx(0.009));
  cfg.eta = 0.01;
  CHECK(stable_dt(advect, g, cfg, 1.0) == doctest::Approx(0.005));
  CHECK(stable_dt(advect, g, cfg, 0.001) == 0.001);

  const auto wave = build(model::Wave1D{4.0}).system;
  const Grid g2(1, 1.0, 100);  // h = 0.02
  SolverConfig cfg2;
  cfg2.cfl = 0.5;
  CHECK(stable_dt(wave, g2, cfg2, 1.0) == doctest::Approx(0.5 * 0.02 / speed_bound(wave)));
  CHECK(stable_dt(wave, g2, cfg2, 1.0) == doctest::Approx(0.005));

  const FriedrichsSystem still({Matrix(1, 1)});
  CHECK(stable_dt(still, g, SolverConfig{}, 1.0) == doctest::Approx(g.spacing()));
  SolverConfig capped;
  capped.max_dt = 1e-4;
  CHECK(stable_dt(advect, g, capped, 1.0) == 1e-4);
}

TEST_CASE("config validation") {
  auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    return thrown_kind([&] { c.validate(); });
  };
  CHECK(bad([](SolverConfig& c) { c.epsilon = 0; }) == ErrorKind::BadParameter);
  CHECK(bad([](SolverConfig& c) { c.eta = -1; }) == ErrorKind::BadParameter);
  CHECK(bad([](SolverConfig& c) { c.cfl = 1.5; }) == ErrorKind::BadParameter);
  CHECK(bad([](SolverConfig& c) { c.cfl = 0; }) == ErrorKind::BadParameter);
  CHECK(bad([](SolverConfig& c) { c.final_time = 0; }) == ErrorKind::BadParameter);
  CHECK(bad([](SolverConfig& c) { c.snapshot_times = {2.0}; }) == ErrorKind::BadParameter);
  SolverConfig ok;
  ok.eta = 0.02;
  CHECK(ok.mollifier_width() == 0.02);
  ok.mollifier = 0.0;
  CHECK(ok.mollifier_width() == 0.0);
}

TEST_CASE("upwind transport") {
  const Grid g(1, 2.0, 100);
  const double h = g.spacing();

  SUBCASE("constants are exact solutions") {
    const auto sys = build(model::Wave1D{2.0}).system;
    const Field c = sample(g, 2, [](Point, std::size_t k) { return k == 0 ? 0.7 : -0.2; });
    const Field out = upwind_step(sys, c, 0.5 * h / sys.speed_bound(), GhostFill::Extrapolate);
    CHECK(max_abs_difference(out, c) <= 1e-15);
  }

  SUBCASE("unit Courant number shifts by one cell") {
    const auto sys = build(model::Advection{{1.0}}).system;
    const Field f = sample(g, 1, [](Point p, std::size_t) { return bump(p[0]); });
    const Field out = upwind_step(sys, f, h);
    CHECK(max_abs_difference(out, shift(f, {-1, 0})) == 0.0);
    const auto left = build(model::Advection{{-1.0}}).system;
    CHECK(max_abs_difference(upwind_step(left, f, h), shift(f, {1, 0})) == 0.0);
  }

  SUBCASE("2D: the full-step direction shifts exactly at unit Courant number") {
    // Directions are split x(dt/2) y(dt) x(dt/2), so only y takes a whole step.
    const Grid g2(2, 1.0, 32);
    const auto sys = build(model::Advection{{0.0, -1.0}}).system;
    const Field f = sample(g2, 1, [](Point p, std::size_t) { return bump(p[0]) * bump(p[1]); });
    CHECK(max_abs_difference(upwind_step(sys, f, g2.spacing()), shift(f, {0, 1})) == 0.0);
  }

  SUBCASE("CFL violation") {
    const auto sys = build(model::Wave1D{4.0}).system;
    const Field f(g, 2);
    CHECK(thrown_kind([&] { upwind_step(sys, f, 0.6 * h); }) == ErrorKind::CFLViolation);
    CHECK(thrown_kind([&] { rusanov_step(sys, f, 0.6 * h); }) == ErrorKind::CFLViolation);
  }

  SUBCASE("d'Alembert convergence") {
    // B = -[[0,1],[1,0]]: v + w moves left at unit speed, v - w right.
    // With v = w = b(x) initially, the exact solution is v = w = b(x + t).
    const auto sys = build(model::Wave1D{1.0}).system;
    const double T = 0.5;
    std::vector<double> errors;
    for (int n : {128, 256, 512}) {
      const Grid gn(1, 2.0, n);
      Field f = sample(gn, 2, [](Point p, std::size_t) { return bump(p[0]); });
      const double dt_max = 0.9 * gn.spacing();
      double t = 0;
      while (t < T - 1e-14) {
        const double dt = std::min(dt_max, T - t);
        f = upwind_step(sys, f, dt);
        t += dt;
      }
      const Field exact = sample(gn, 2, [&](Point p, std::size_t) { return bump(p[0] + T); });
      errors.push_back(l2_distance(f, exact));
    }
    for (std::size_t i = 1; i < errors.size(); ++i) {
      const double order = std::log2(errors[i - 1] / errors[i]);
      MESSAGE("upwind order " << order);
      CHECK(order >= 0.8);
    }
  }
}

TEST_CASE("rusanov flux") {
  const Grid g(1, 2.0, 200);
  const double h = g.spacing();

  SUBCASE("constants and zero matrices") {
    const auto sys = build(model::Wave1D{1.0}).system;
    const Field c = sample(g, 2, [](Point, std::size_t k) { return 1.0 + k; });
    CHECK(max_abs_difference(rusanov_step(sys, c, 0.5 * h, GhostFill::Extrapolate), c) <= 1e-15);
    const FriedrichsSystem zero({Matrix(2, 2)});
    const Field f = random_field(g, 2, 1);
    CHECK(max_abs_difference(rusanov_step(zero, f, 0.5 * h), f) == 0.0);
  }

  SUBCASE("more diffusive than upwind on a bump") {
    const auto sys = build(model::Advection{{1.0}}).system;
    const Field f0 = sample(g, 1, [](Point p, std::size_t) { return bump(p[0]); });
    Field up = f0, ru = f0;
    const double dt = 0.5 * h, T = 0.5;
    for (int s = 0; s < static_cast<int>(std::round(T / dt)); ++s) {
      up = upwind_step(sys, up, dt);
      ru = rusanov_step(sys, ru, dt);
    }
    const Field exact = sample(g, 1, [&](Point p, std::size_t) { return bump(p[0] - T); });
    CHECK(l2_distance(ru, exact) >= l2_distance(up, exact));
    // Agreement to first order in h.
    CHECK(l2_distance(ru, up) <= 10 * h);
  }
}

TEST_CASE("transport and diffusion never increase the L2 norm") {
  const auto wave = build(model::Wave1D{3.0}).system;
  const FriedrichsSystem sys2({Matrix(2, 2, {1, 0.5, 0.5, -1}), Matrix(2, 2, {0, 2, 2, 0})});
  const Grid g1(1, 1.0, 64), g2(2, 1.0, 24);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (GhostFill ghost : {GhostFill::Zero, GhostFill::Extrapolate}) {
      const Field f1 = random_field(g1, 2, seed);
      const double dt1 = 0.9 * g1.spacing() / wave.speed_bound();
      CHECK(l2_norm(upwind_step(wave, f1, dt1, ghost)) <= l2_norm(f1) * (1 + 1e-12));
      CHECK(l2_norm(rusanov_step(wave, f1, dt1, ghost)) <= l2_norm(f1) * (1 + 1e-12));
      CHECK(l2_norm(diffusion_step(f1, 0.1, 0.4 * g1.spacing() * g1.spacing() / 0.1, ghost)) <=
            l2_norm(f1) * (1 + 1e-12));

      const Field f2 = random_field(g2, 2, seed + 100);
      const double dt2 = 0.9 * g2.spacing() / sys2.speed_bound();
      CHECK(l2_norm(upwind_step(sys2, f2, dt2, ghost)) <= l2_norm(f2) * (1 + 1e-12));
      CHECK(l2_norm(rusanov_step(sys2, f2, dt2 / 2, ghost)) <= l2_norm(f2) * (1 + 1e-12));
      CHECK(l2_norm(diffusion_step(f2, 0.1, 0.2 * g2.spacing() * g2.spacing() / 0.1, ghost)) <=
            l2_norm(f2) * (1 + 1e-12));
    }
  }
}

TEST_CASE("diffusion step") {
  const Grid g(1, 1.0, 20);
  const double h = g.spacing();
  const Field f = random_field(g, 1, 4);
  CHECK(max_abs_difference(diffusion_step(f, 0.0, 0.1), f) == 0.0);

  const Field c = sample(g, 2, [](Point, std::size_t) { return 3.0; });
  CHECK(max_abs_difference(diffusion_step(c, 0.1, 0.4 * h * h / 0.1, GhostFill::Extrapolate), c) <= 1e-15);

  // Hand calculation: a unit spike gains (eta dt / h^2) * (1, -2, 1).
  Field spike(g, 1);
  spike.at(10)[0] = 1.0;
  const double eta = 0.05, dt = 0.3 * h * h / eta;
  const Field out = diffusion_step(spike, eta, dt);
  const double r = eta * dt / (h * h);
  CHECK(out.at(9)[0] == doctest::Approx(r).epsilon(1e-14));
  CHECK(out.at(10)[0] == doctest::Approx(1 - 2 * r).epsilon(1e-14));
  CHECK(out.at(11)[0] == doctest::Approx(r).epsilon(1e-14));
  CHECK(out.at(8)[0] == 0.0);

  // Discrete maximum principle per component.
  const Field rough = random_field(g, 2, 9);
  const Field smooth = diffusion_step(rough, eta, dt, GhostFill::Extrapolate);
  for (std::size_t k = 0; k < 2; ++k) {
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      lo = std::min(lo, rough.at(i)[k]);
      hi = std::max(hi, rough.at(i)[k]);
    }
    for (std::size_t i = 0; i < g.cell_count(); ++i) {
      CHECK(smooth.at(i)[k] >= lo - 1e-15);
      CHECK(smooth.at(i)[k] <= hi + 1e-15);
    }
  }

  CHECK(thrown_kind([&] { diffusion_step(f, eta, 0.6 * h * h / eta); }) == ErrorKind::StabilityViolation);
}

TEST_CASE("exact relaxation") {
  const Grid g(1, 1.0, 4);
  const ConvexSet ball = ConvexSet::ball({0, 0}, 1);

  SUBCASE("states in K are fixed") {
    Field f(g, 2);
    f.store(0, Vector{0.3, -0.4});
    f.store(2, Vector{1.0, 0.0});
    CHECK(max_abs_difference(relaxation_step_exact(ball, f, 0.1, 1.0), f) == 0.0);
  }

  SUBCASE("matches an RK4 solution of the ODE") {
    Field f(g, 2);
    f.store(1, Vector{2, 0});
    const Field out = relaxation_step_exact(ball, f, 1.0, std::log(2.0));
    CHECK(out.at(1)[0] == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(out.at(1)[1] == 0.0);
    // Right-hand side written directly from the radial projection formula.
    auto rhs = [](const std::vector<double>& y) {
      const double r = std::hypot(y[0], y[1]);
      const double s = r > 1 ? 1 / r : 1.0;
      return std::vector<double>{y[0] * s - y[0], y[1] * s - y[1]};
    };
    const auto y = cfrelax::testing::rk4(rhs, {2, 0}, std::log(2.0), 1e-4);
    CHECK(std::abs(y[0] - out.at(1)[0]) <= 1e-8);
    CHECK(std::abs(y[1] - out.at(1)[1]) <= 1e-8);
  }

  SUBCASE("saturates to the projection") {
    Field f(g, 2);
    f.store(0, Vector{3, 4});
    f.store(3, Vector{-0.1, 7});
    const double eps = 0.01;
    const Field out = relaxation_step_exact(ball, f, eps, 50 * eps);
    for (std::size_t c = 0; c < 4; ++c) {
      const Vector p = project(ball, f.at(c));
      CHECK(distance(out.at(c), p) <= 1e-12);
    }
  }

  SUBCASE("distance decays exactly exponentially") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-4, 4), logu(-3, 1);
    const ConvexSet strip = build(model::ElastoPlastic1D{1.0, 0.5}).constraint.value();
    for (const ConvexSet* k : {&ball, &strip}) {
      Field f(g, 2);
      for (int trial = 0; trial < 50; ++trial) {
        for (std::size_t c = 0; c < 4; ++c) f.store(c, Vector{u(rng), u(rng)});
        const double eps = std::pow(10.0, logu(rng)), dt = std::pow(10.0, logu(rng));
        const Field out = relaxation_step_exact(*k, f, eps, dt);
        for (std::size_t c = 0; c < 4; ++c) {
          const double before = distance(*k, f.at(c)), after = distance(*k, out.at(c));
          CHECK(std::abs(after - std::exp(-dt / eps) * before) <= 1e-12 * std::max(before, 1e-300));
        }
      }
    }
  }

  SUBCASE("implicit Euler variant") {
    Field f(g, 2);
    f.store(1, Vector{2, 0});
    const double eps = 0.5, dt = 0.2;
    const Field out = relaxation_step_implicit(ball, f, eps, dt);
    const double r = dt / eps;
    CHECK(out.at(1)[0] == doctest::Approx((2 + r * 1) / (1 + r)));
    // Both integrators agree to O(dt^2) for dt << eps.
    const double small = 1e-3;
    const double diff = distance(relaxation_step_implicit(ball, f, eps, small).at(1),
                                 relaxation_step_exact(ball, f, eps, small).at(1));
    CHECK(diff <= (small / eps) * (small / eps));
  }
}

TEST_CASE("strang step") {
  const auto inst = build(model::ElastoPlastic1D{1.0, 0.5});
  const ConvexSet& k = *inst.constraint;
  const Grid g(1, 2.0, 128);
  const double h = g.spacing();
  SolverConfig cfg;
  cfg.epsilon = 0.05;

  SUBCASE("constant state in K stays put") {
    SolverConfig c = cfg;
    c.boundary = GhostFill::Extrapolate;
    Field f = sample(g, 2, [](Point, std::size_t i) { return i == 0 ? 0.3 : -0.2; });
    const Field f0 = f;
    for (int s = 0; s < 20; ++s) f = strang_step(inst.system, k, f, c, 0.9 * h);
    // Rounding from the characteristic transforms only.
    CHECK(max_abs_difference(f, f0) <= 1e-14);
  }

  SUBCASE("huge epsilon reduces to transport") {
    SolverConfig c = cfg;
    c.epsilon = 1e12;
    const Field f = sample(g, 2, [](Point p, std::size_t i) { return (i + 1.0) * bump(p[0]); });
    const double dt = 0.9 * h;
    CHECK(max_abs_difference(strang_step(inst.system, k, f, c, dt), upwind_step(inst.system, f, dt)) <= 1e-9);
  }

  SUBCASE("constraint violation shrinks") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1, 1);
    Field f = sample(g, 2, [&](Point p, std::size_t) { return std::abs(p[0]) < 1 ? u(rng) : 0.0; });
    const double dt = 0.9 * h;
    const double before = constraint_distance(k, f);
    const double after = constraint_distance(k, strang_step(inst.system, k, f, cfg, dt));
    CHECK(before > 0.1);
    CHECK(after < before);
    // Relaxation contracts the distance by exp(-dt/eps); characteristic
    // upwinding is a convex combination per characteristic variable, which
    // can amplify the strip distance by at most a factor 2 in max norm.
    CHECK(after <= std::exp(-dt / cfg.epsilon) * before * 2);
  }

  SUBCASE("energy and contraction per step") {
    SolverConfig c = cfg;
    c.eta = 0.01;
    const double dt = std::min(0.9 * h, h * h / (2 * c.eta));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Field a = random_field(g, 2, seed, 2.0), b = random_field(g, 2, seed + 50, 2.0);
      const Field a1 = strang_step(inst.system, k, a, c, dt), b1 = strang_step(inst.system, k, b, c, dt);
      CHECK(l2_norm(a1) <= l2_norm(a) * (1 + 1e-12));
      CHECK(l2_distance(a1, b1) <= l2_distance(a, b) * (1 + 1e-12));
    }
  }
}

TEST_CASE("run") {
  const auto inst = build(model::ElastoPlastic1D{1.0, 0.5});
  const ConvexSet& k = *inst.constraint;
  const Grid g(1, 2.0, 128);
  SolverConfig cfg;
  cfg.epsilon = 0.05;
  cfg.final_time = 0.5;
  cfg.snapshot_times = {0.1, 0.25};

  SUBCASE("zero data stays zero") {
    const RunReport r = run(inst.system, k, Field(g, 2), cfg);
    REQUIRE(r.complete);
    for (const auto& rec : r.records) CHECK(rec.energy == 0.0);
    for (const auto& s : r.snapshots)
      CHECK(std::all_of(s.values().begin(), s.values().end(), [](double v) { return v == 0.0; }));
  }

  SUBCASE("snapshots land on the requested times") {
    const Field w0 = make_initial(g, preset::Riemann{{1, 0}, {-1, 0}, 0.0, 0.5});
    const RunReport r = run(inst.system, k, w0, cfg);
    REQUIRE(r.complete);
    REQUIRE(r.snapshots.size() == 4);
    CHECK(r.snapshots[0].time() == 0.0);
    CHECK(r.snapshots[1].time() == 0.1);
    CHECK(r.snapshots[2].time() == 0.25);
    CHECK(r.snapshots[3].time() == 0.5);
    CHECK(r.records.back().t == 0.5);
    for (std::size_t i = 1; i < r.records.size(); ++i) {
      CHECK(r.records[i].t > r.records[i - 1].t);
      CHECK(r.records[i].energy <= r.records[i - 1].energy * (1 + 1e-12));
    }
    CHECK(r.energy_bounded_by_data());
  }

  SUBCASE("inactive constraint equals pure transport") {
    const Field w0 = sample(g, 2, [](Point p, std::size_t i) { return (1.0 - 2.0 * i) * bump(p[0]); });
    SolverConfig c = cfg;
    c.snapshot_times.clear();
    const RunReport r = run(inst.system, huge_ball(2), w0, c);
    REQUIRE(r.complete);
    Field f = w0;
    double t = 0;
    while (t < c.final_time) {
      double dt = stable_dt(inst.system, g, c, c.final_time - t);
      if (t + dt >= c.final_time - 1e-12 * c.final_time) dt = c.final_time - t;
      f = upwind_step(inst.system, f, dt);
      t += dt;
    }
    CHECK(max_abs_difference(r.snapshots.back(), f) <= 1e-12);
  }

  SUBCASE("constraint distance drops with epsilon") {
    const Field w0 = make_initial(g, preset::Riemann{{1, 0}, {-1, 0}, 0.0, 0.5});
    double previous = INFINITY;
    for (double eps : {0.1, 0.05, 0.025}) {
      SolverConfig c = cfg;
      c.epsilon = eps;
      const RunReport r = run(inst.system, k, w0, c);
      double sup = 0;
      for (const auto& rec : r.records)
        if (rec.t > 0) sup = std::max(sup, rec.constraint_dist);
      CHECK(sup < previous);
      previous = sup;
    }
  }

  SUBCASE("support precheck") {
    const Grid small(1, 0.6, 64);
    const Field w0 = make_initial(small, preset::Bump{{0, 0}, 0.5, {1, 0}});
    CHECK(thrown_kind([&] { run(inst.system, k, w0, cfg); }) == ErrorKind::SupportPrecheckFailed);
    SolverConfig c = cfg;
    c.boundary = GhostFill::Extrapolate;
    CHECK(run(inst.system, k, w0, c).complete);
  }

  SUBCASE("zero ghost fill needs the origin in K") {
    const ConvexSet shifted = ConvexSet::ball({5, 0}, 1, {.anchor = Vector{5, 0}});
    const Field w0 = make_initial(g, preset::Bump{{0, 0}, 0.5, {1, 0}});
    CHECK(thrown_kind([&] { run(inst.system, shifted, w0, cfg); }) == ErrorKind::BadParameter);
  }

  SUBCASE("failures mid-run give a partial report") {
    const Vector anchor{0.0, 0.0};
    const ConvexSet fragile = ConvexSet::intersection(
        {ConvexSet::ball({0, 0}, 0.6), ConvexSet::half_space({std::sqrt(0.5), std::sqrt(0.5)}, 0.3)}, {}, 1e-10, 1);
    const Field w0 = make_initial(g, preset::Riemann{{1, 1}, {-1, 0.5}, 0.0, 0.5});
    const RunReport r = run(inst.system, fragile, w0, cfg);
    CHECK_FALSE(r.complete);
    CHECK(r.error.find("NonConvergence") != std::string::npos);
    CHECK(r.steps == 0);
    CHECK(r.initial.has_value());
  }
}

TEST_CASE("parabolic run") {
  SUBCASE("needs eta > 0") {
    const auto inst = build(model::Wave1D{1.0});
    const Grid g(1, 2.0, 64);
    CHECK(thrown_kind([&] { parabolic_run(inst.system, huge_ball(2), Field(g, 2), SolverConfig{}); }) ==
          ErrorKind::BadParameter);
  }

  SUBCASE("heat kernel") {
    // Mollifying a Gaussian of variance s^2 with std eta adds eta^2; the heat
    // flow u_t = eta u_xx adds 2 eta T.
    const FriedrichsSystem still({Matrix(1, 1)});
    const double s = 0.1, eta = 0.05, T = 0.2;
    const double var = s * s + eta * eta + 2 * eta * T;
    std::vector<double> rel;
    for (int n : {200, 400}) {
      const Grid g(1, 2.0, n);
      const Field w0 = sample(g, 1, [&](Point p, std::size_t) {
        return std::abs(p[0]) < 1 ? std::exp(-p[0] * p[0] / (2 * s * s)) : 0.0;
      });
      SolverConfig cfg;
      cfg.eta = eta;
      cfg.final_time = T;
      const RunReport r = parabolic_run(still, huge_ball(1), w0, cfg);
      REQUIRE(r.complete);
      const Field exact = sample(g, 1, [&](Point p, std::size_t) {
        return s / std::sqrt(var) * std::exp(-p[0] * p[0] / (2 * var));
      });
      rel.push_back(l2_distance(r.snapshots.back(), exact) / l2_norm(exact));
    }
    MESSAGE("heat relative errors " << rel[0] << " " << rel[1]);
    CHECK(rel[1] <= 0.02);
    CHECK(rel[1] < rel[0]);
  }

  SUBCASE("energy stays monotone on a plastic run") {
    const auto inst = build(model::ElastoPlastic1D{1.0, 0.5});
    const Grid g(1, 2.0, 512);
    const Field w0 = make_initial(g, preset::Riemann{{1, 0.3}, {-1, -0.2}, 0.0, 0.5});
    SolverConfig cfg;
    cfg.epsilon = 0.05;
    cfg.eta = 0.01;
    cfg.final_time = 0.5;
    const RunReport r = parabolic_run(inst.system, *inst.constraint, w0, cfg);
    REQUIRE(r.complete);
    for (std::size_t i = 1; i < r.records.size(); ++i)
      CHECK(r.records[i].energy <= r.records[i - 1].energy * (1 + 1e-12));
    for (const auto& rec : r.records) CHECK(rec.energy <= r.data_energy * (1 + 1e-12));
  }
}

TEST_CASE("strang splitting converges on smooth interior data") {
  const auto inst = build(model::Wave1D{1.0});
  std::vector<double> errors;
  for (int n : {128, 256, 512}) {
    const Grid g(1, 2.0, n);
    const Field w0 = sample(g, 2, [](Point p, std::size_t) { return bump(p[0]); });
    SolverConfig cfg;
    cfg.epsilon = 0.01;
    cfg.final_time = 0.5;
    const RunReport r = run(inst.system, huge_ball(2), w0, cfg);
    const Field exact = sample(g, 2, [&](Point p, std::size_t) { return bump(p[0] + cfg.final_time); });
    errors.push_back(l2_distance(r.snapshots.back(), exact));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) CHECK(std::log2(errors[i - 1] / errors[i]) >= 0.8);
}
