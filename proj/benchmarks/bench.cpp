#include <benchmark/benchmark.h>

#include <random>

#include "cfrelax/convex.hpp"
#include "cfrelax/initial_data.hpp"
#include "cfrelax/solver.hpp"
#include "cfrelax/system.hpp"

using namespace cfrelax;

namespace {

std::vector<Vector> random_points(std::size_t count, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<Vector> out(count, Vector(dim));
  for (auto& p : out)
    for (auto& x : p) x = u(rng);
  return out;
}

void BM_ProjectBall(benchmark::State& state) {
  const ConvexSet k = ConvexSet::ball({0.0, 0.0, 0.0}, 1.0);
  const auto pts = random_points(1024, 3);
  Vector out(3);
  std::size_t i = 0;
  for (auto _ : state) {
    project_into(k, pts[i++ % pts.size()], out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ProjectBall);

// Dykstra on a lens plus a half-space: the iterative path.
void BM_ProjectIntersection(benchmark::State& state) {
  const ConvexSet k = ConvexSet::intersection({ConvexSet::ball({0.5, 0.0}, 1.0), ConvexSet::ball({-0.5, 0.0}, 1.0),
                                               ConvexSet::half_space({0.0, 1.0}, 0.5)});
  const auto pts = random_points(1024, 2);
  Vector out(2);
  std::size_t i = 0;
  for (auto _ : state) {
    project_into(k, pts[i++ % pts.size()], out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_ProjectIntersection);

void BM_StrangStep1D(benchmark::State& state) {
  const auto model = build(model::ElastoPlastic1D{1.0, 0.5});
  const Grid g(1, 2.0, static_cast<int>(state.range(0)));
  Field f = make_initial(g, preset::Riemann{{1.0, 0.0}, {-1.0, 0.0}, 0.0, 1.0});
  SolverConfig cfg;
  cfg.epsilon = 0.01;
  const double dt = stable_dt(model.system, g, cfg, 1.0);
  for (auto _ : state) {
    Field next = strang_step(model.system, *model.constraint, f, cfg, dt);
    benchmark::DoNotOptimize(next.values().data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StrangStep1D)->Arg(512)->Arg(4096);

void BM_StrangStep2D(benchmark::State& state) {
  const auto model = build(model::Advection{{1.0, 0.5}});
  const ConvexSet k = ConvexSet::box({-0.5}, {0.5});
  const int n = static_cast<int>(state.range(0));
  const Grid g(2, 2.0, n);
  const Field f = make_initial(g, preset::Bump{{0.0, 0.0}, 0.5, {1.0}});
  SolverConfig cfg;
  cfg.epsilon = 0.01;
  const double dt = stable_dt(model.system, g, cfg, 1.0);
  for (auto _ : state) {
    Field next = strang_step(model.system, k, f, cfg, dt);
    benchmark::DoNotOptimize(next.values().data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_StrangStep2D)->Arg(64)->Arg(128);

void BM_DemoRun(benchmark::State& state) {
  const auto model = build(model::ElastoPlastic1D{1.0, 0.5});
  const Grid g(1, 2.0, 512);
  const Field w0 = make_initial(g, preset::Riemann{{1.0, 0.0}, {-1.0, 0.0}, 0.0, 1.0});
  SolverConfig cfg;
  cfg.epsilon = 0.01;
  cfg.final_time = 0.5;
  for (auto _ : state) {
    RunReport r = run(model.system, *model.constraint, w0, cfg);
    benchmark::DoNotOptimize(r.steps);
  }
}
BENCHMARK(BM_DemoRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
