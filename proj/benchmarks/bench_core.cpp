#include <benchmark/benchmark.h>

#include "qdet/absorbing.hpp"
#include "qdet/dynamics.hpp"
#include "qdet/effective.hpp"
#include "qdet/numerics.hpp"

using namespace qdet;

namespace {

Lattice chain(int n) {
  LatticeSpec spec;
  spec.geometry = Geometry::chain_open;
  spec.n = n;
  return build(spec);
}

void BM_eig_sym(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Lattice lat = chain(n);
  for (auto _ : state) {
    auto spec = eig_sym(lat.hamiltonian.matrix);
    benchmark::DoNotOptimize(spec.eigenvalues.data());
  }
}
BENCHMARK(BM_eig_sym)->Arg(50)->Arg(200);

void BM_expm(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Lattice lat = chain(n);
  const auto heff = build_heff(lat.hamiltonian, lat.detectors, 0.1);
  const Eigen::MatrixXcd gen = Complex(0.0, -0.1) * heff.matrix;
  for (auto _ : state) {
    auto m = expm(gen);
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_expm)->Arg(50)->Arg(200);

void BM_evolve_steps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Lattice lat = chain(n);
  const StepOperator u = step_operator(lat.hamiltonian, lat.detectors, 0.1);
  const StateVector psi0 = StateVector::position(n, n / 2);
  for (auto _ : state) {
    auto series = evolve(u, psi0, {0.1, 1000, {}});
    benchmark::DoNotOptimize(series.rows.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_evolve_steps)->Arg(20)->Arg(100);

void BM_evolve_2d_steps(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const StepOperator2D u = step_operator_2d(n, 1.0, 3, 0.1);
  const StateVector psi0 =
      StateVector::position(n * n, flat_index(n, n / 2, n / 2));
  for (auto _ : state) {
    auto series = evolve_2d(u, psi0, {0.1, 1000, {}});
    benchmark::DoNotOptimize(series.rows.data());
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_evolve_2d_steps)->Arg(20)->Arg(50);

void BM_chain_survival(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  double t = 100.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(chain_survival(n, n / 2, 0.1, t));
    t += 0.1;
  }
}
BENCHMARK(BM_chain_survival)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
