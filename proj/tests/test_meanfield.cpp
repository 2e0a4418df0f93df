#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qdet/dynamics.hpp"
#include "qdet/meanfield.hpp"

using namespace qdet;

namespace {

Lattice complete(int n) {
  LatticeSpec spec;
  spec.geometry = Geometry::complete;
  spec.n = n;
  spec.layout.kind = DetectorLayout::Kind::single;
  spec.layout.site = n;
  return build(spec);
}

SurvivalSeries exact_series(int n, double tau, int ell, long n_max) {
  const Lattice lat = complete(n);
  const StepOperator u = step_operator(lat.hamiltonian, lat.detectors, tau);
  return evolve(u, StateVector::position(n, ell - 1), {tau, n_max, {}});
}

}  // namespace

TEST_CASE("mf_solve: direct values and the resonance period") {
  // tau N = pi with N = 2: 1 - cos = 2, x = 1.
  CHECK(mf_solve(2, std::numbers::pi / 2).x ==
        doctest::Approx(1.0).epsilon(1e-14));

  // x vanishes at the characteristic interval tau0 = 2 pi / N.
  const auto sol = mf_solve(12, 2.0 * std::numbers::pi / 12);
  CHECK(sol.x < 1e-30);

  // Periodicity in tau0.
  const auto a = mf_solve(5, 0.7);
  const auto b = mf_solve(5, 0.7 + 2.0 * std::numbers::pi / 5);
  CHECK(a.x == doctest::Approx(b.x).epsilon(1e-12));
  CHECK(std::abs(a.lambda2 - b.lambda2) < 1e-12);
  CHECK(std::abs(a.c_inv - b.c_inv) < 1e-12);
}

TEST_CASE("mf_solve: |lambda2|^2 consistency with 1 - x") {
  for (int n : {2, 3, 5, 10, 100})
    for (double tau : {0.05, 0.3, 1.1, 2.7}) {
      const auto sol = mf_solve(n, tau);
      CHECK(std::abs(std::norm(sol.lambda2) - (1.0 - sol.x)) < 1e-12);
      CHECK(sol.x >= 0.0);
      CHECK(sol.x <= 4.0 / n * (1.0 - 1.0 / n) + 1e-15);
    }
}

TEST_CASE("mf_series: resonant interval means no detection") {
  const int n = 5;
  const auto sol = mf_solve(n, 2.0 * std::numbers::pi / n);
  const auto away = mf_series(sol, 2, 50);
  for (const auto& row : away.rows) CHECK(std::abs(row.p) < 1e-16);
  const auto on = mf_series(sol, n, 50);
  CHECK(on.rows[0].p == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t i = 1; i < on.rows.size(); ++i)
    CHECK(std::abs(on.rows[i].p) < 1e-16);
}

TEST_CASE("mf_series: matches the exact engine to near round-off") {
  const auto sol = mf_solve(5, 0.3);
  const auto analytic = mf_series(sol, 2, 50);
  const auto exact = exact_series(5, 0.3, 2, 50);
  for (long i = 0; i < 50; ++i) {
    CHECK(std::abs(analytic.rows[i].P - exact.rows[i].P) < 1e-10);
    CHECK(std::abs(analytic.rows[i].p - exact.rows[i].p) < 1e-10);
  }
}

TEST_CASE("mf_series: closed-form telescoping holds exactly") {
  for (int ell : {1, 6}) {
    const auto sol = mf_solve(6, 0.45);
    const auto s = mf_series(sol, ell, 200);
    double acc = 1.0;
    for (const auto& row : s.rows) {
      acc -= row.p;
      CHECK(row.P == doctest::Approx(acc).epsilon(1e-12));
    }
  }
}

TEST_CASE("mf_series: log p_n is affine in n with slope log(1-x)") {
  const auto sol = mf_solve(7, 0.4);
  const auto s = mf_series(sol, 3, 60);
  const double slope = std::log(1.0 - sol.x);
  for (std::size_t i = 1; i < s.rows.size(); ++i)
    CHECK(std::log(s.rows[i].p) - std::log(s.rows[i - 1].p) ==
          doctest::Approx(slope).epsilon(1e-9));
}

TEST_CASE("mf_series: large-n decay exponent approaches xi") {
  const int n = 100;
  const auto sol = mf_solve(n, 0.01);
  CHECK(std::abs(std::log(1.0 - sol.x)) ==
        doctest::Approx(sol.xi).epsilon(0.01));
}

TEST_CASE("mf_series: Zeno suppression as tau -> 0") {
  double prev = 1.0;
  for (double tau : {1e-2, 1e-3, 1e-4}) {
    const auto sol = mf_solve(20, tau);
    const auto s = mf_series(sol, 3, 1);
    CHECK(s.rows[0].p < prev);
    prev = s.rows[0].p;
  }
  CHECK(prev < 1e-8);
}

TEST_CASE("mf_total_detection: sum rule values and geometric convergence") {
  CHECK(mf_total_detection(5, 2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(mf_total_detection(5, 5) == 1.0);

  const auto sol = mf_solve(5, 0.3);
  const auto s = mf_series(sol, 2, 400);
  double acc = 0.0;
  std::vector<double> residual;
  for (const auto& row : s.rows) {
    acc += row.p;
    residual.push_back(std::abs(0.25 - acc));
  }
  CHECK(residual.back() < 1e-10);
  // Geometric with ratio 1-x (early indices, before the residual drowns
  // in the round-off of the 0.25 subtraction).
  CHECK(residual[20] / residual[19] ==
        doctest::Approx(1.0 - sol.x).epsilon(1e-6));
}

TEST_CASE("mf_steady_state: values, invariance, norm") {
  const auto ss3 = mf_steady_state(3, 1);
  CHECK(ss3.amplitudes(0) == Complex(0.5, 0.0));
  CHECK(ss3.amplitudes(1) == Complex(-0.5, 0.0));
  CHECK(ss3.amplitudes(2) == Complex(0.0, 0.0));

  const int n = 5;
  const Lattice lat = complete(n);
  const StepOperator u = step_operator(lat.hamiltonian, lat.detectors, 0.3);
  const auto ss = mf_steady_state(n, 2);
  CHECK((u.matrix * ss.amplitudes - ss.amplitudes).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(ss.norm_sq == doctest::Approx(1.0 - 1.0 / (n - 1)).epsilon(1e-12));

  CHECK_THROWS_AS(mf_steady_state(5, 5), ConfigError);
}

TEST_CASE("mf_steady_state: the evolved state actually converges to it") {
  const int n = 5;
  const Lattice lat = complete(n);
  const StepOperator u = step_operator(lat.hamiltonian, lat.detectors, 0.3);
  Eigen::VectorXcd psi = StateVector::position(n, 1).amplitudes;
  for (int k = 0; k < 2000; ++k) psi = u.matrix * psi;
  const auto ss = mf_steady_state(n, 2);
  CHECK((psi - ss.amplitudes).cwiseAbs().maxCoeff() < 1e-10);
}
