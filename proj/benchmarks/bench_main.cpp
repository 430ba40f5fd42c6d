#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "wiener/chaos.hpp"
#include "wiener/propagator.hpp"
#include "wiener/stepper.hpp"

using namespace wiener;

namespace {

void BM_Enumerate(benchmark::State& state) {
  const TruncationBox box{static_cast<unsigned>(state.range(0)), static_cast<unsigned>(state.range(1))};
  for (auto _ : state) {
    auto index = IndexSet::make(box, 1u << 22);
    benchmark::DoNotOptimize(index->size());
  }
  state.counters["indices"] = static_cast<double>(IndexSet::make(box, 1u << 22)->size());
}
BENCHMARK(BM_Enumerate)->Args({4, 8})->Args({6, 10})->Args({8, 8})->Unit(benchmark::kMicrosecond);

void BM_WickProduct(benchmark::State& state) {
  const TruncationBox box{static_cast<unsigned>(state.range(0)), static_cast<unsigned>(state.range(1))};
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d;
  ChaosSeries f(CoefficientSpace::scalar(), box), g(CoefficientSpace::scalar(), box);
  for (auto& c : f.data()) c = d(rng);
  for (auto& c : g.data()) c = d(rng);
  for (auto _ : state) {
    auto fg = wick_product(f, g, BoxPolicy::truncate);
    benchmark::DoNotOptimize(fg.data().data());
  }
}
BENCHMARK(BM_WickProduct)->Args({3, 4})->Args({4, 6})->Args({6, 4})->Unit(benchmark::kMicrosecond);

void BM_Stepper(benchmark::State& state) {
  const auto nx = static_cast<std::size_t>(state.range(0));
  const auto nt = static_cast<std::size_t>(state.range(1));
  const auto space = CoefficientSpace::fourier_modes(nx, 2.0 * std::numbers::pi);
  const auto a = OperatorFamily::multiplier(space, {1.0, 0.0, 0.0});
  ExponentialStepper stepper(a, 1.0, nt);
  Matrix forcing = Matrix::Constant(static_cast<Eigen::Index>(nx), static_cast<Eigen::Index>(nt + 1), 1.0);
  const Vector u0 = Vector::Ones(static_cast<Eigen::Index>(nx));
  for (auto _ : state) {
    Matrix u = stepper.integrate(u0, forcing);
    benchmark::DoNotOptimize(u.data());
  }
}
BENCHMARK(BM_Stepper)->Args({64, 256})->Args({256, 1024})->Unit(benchmark::kMicrosecond);

void BM_Solve(benchmark::State& state) {
  const auto order = static_cast<unsigned>(state.range(0));
  const auto modes = static_cast<unsigned>(state.range(1));
  const std::size_t nx = 32, nt = 128;
  const double length = 4.0 * std::numbers::pi;
  const auto space = CoefficientSpace::fourier_modes(nx, length);
  std::vector<Complex> grid(nx);
  const auto x = space.grid();
  for (std::size_t l = 0; l < nx; ++l) grid[l] = std::exp(-std::pow((x[l] - 0.5 * length) / 2.0, 2));
  const Vector c = grid_to_fourier(grid);
  auto p = std::make_shared<EvolutionProblem>(EvolutionProblem{
      space, OperatorFamily::multiplier(space, {1.0, 0.0, 0.0}),
      NoiseOperatorFamily::derivative(NoiseModel::time_white(1.0, modes), space, 0.8, 1),
      ChaosSeries::deterministic(space, {order, modes}, {c.data(), static_cast<std::size_t>(c.size())}), {}, 1.0,
      nt, {order, modes}});
  SolveOptions opts;
  opts.weights = WeightSequence::constant(2.0);
  for (auto _ : state) {
    auto sol = solve(p, opts);
    benchmark::DoNotOptimize(sol.stats().second_moment.back());
  }
  state.counters["indices"] = static_cast<double>(IndexSet::make({order, modes})->size());
}
BENCHMARK(BM_Solve)->Args({2, 4})->Args({3, 6})->Args({4, 4})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
