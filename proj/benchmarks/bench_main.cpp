#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "gausstv/grid.hpp"
#include "gausstv/operators.hpp"
#include "gausstv/solvers.hpp"
#include "gausstv/theorem_lab.hpp"

using namespace gausstv;

namespace {

GridPtr square(double h) { return Grid::build(2, BoxDomain{6.0}, h); }

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

void BM_GradDiv(benchmark::State& state) {
  const auto g = square(12.0 / static_cast<double>(state.range(0)));
  const auto u = noise(g->size(), 1);
  std::vector<double> du(g->size() * 2), out(g->size());
  for (auto _ : state) {
    apply_grad(*g, u, du);
    apply_div_gamma(*g, du, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(g->size()));
}
BENCHMARK(BM_GradDiv)->Arg(100)->Arg(400)->Arg(1000);

void BM_KorevaarGap(benchmark::State& state) {
  const auto g = square(12.0 / static_cast<double>(state.range(0)));
  const ScalarField u = ScalarField::sample(g, [](auto x) { return x[0] * x[0] + std::abs(x[1]); });
  for (auto _ : state) benchmark::DoNotOptimize(korevaar_gap(u, 1e-3).gap);
}
BENCHMARK(BM_KorevaarGap)->Arg(40)->Arg(80)->Arg(160)->Unit(benchmark::kMillisecond);

void BM_SolveSmoothed1D(benchmark::State& state) {
  const auto g = Grid::build(1, BoxDomain{6.0}, 0.01);
  Problem p(ScalarField::sample(g, [](auto x) { return std::abs(x[0]); }));
  p.eps = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve(p).report.iterations);
}
BENCHMARK(BM_SolveSmoothed1D)->Arg(1)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SolveOu2D(benchmark::State& state) {
  const auto g = square(0.1);
  Problem p(ScalarField::sample(g, [](auto x) { return x[0] * x[0] + x[1] * x[1]; }));
  p.model = Model::ornstein_uhlenbeck;
  p.solver.linear_solver = state.range(0) ? LinearSolver::cholesky : LinearSolver::conjugate_gradient;
  for (auto _ : state) benchmark::DoNotOptimize(solve(p).report.el_residual);
}
BENCHMARK(BM_SolveOu2D)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_SolveTvPd(benchmark::State& state) {
  const auto g = Grid::build(1, BoxDomain{6.0}, 0.01);
  Problem p(ScalarField::sample(g, [](auto x) { return 2 * x[0]; }));
  for (auto _ : state) benchmark::DoNotOptimize(solve(p).report.iterations);
}
BENCHMARK(BM_SolveTvPd)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
