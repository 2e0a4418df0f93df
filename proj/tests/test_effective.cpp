#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "qdet/dynamics.hpp"
#include "qdet/effective.hpp"

using namespace qdet;

namespace {

constexpr double kPi = std::numbers::pi;

Lattice make(Geometry g, int n, DetectorLayout lay = {}) {
  LatticeSpec spec;
  spec.geometry = g;
  spec.n = n;
  spec.layout = lay;
  return build(spec);
}

SurvivalSeries exact_series(const Lattice& lat, int ell, double tau,
                            long n_max) {
  const StepOperator u = step_operator(lat.hamiltonian, lat.detectors, tau);
  return evolve(u, StateVector::position(lat.hamiltonian.n_sites(), ell - 1),
                {tau, n_max, {}});
}

}  // namespace

TEST_CASE("build_heff: end detector adds -i tau/2 on the adjacent site") {
  const int n = 6;
  const double tau = 0.2;
  const Lattice lat = make(Geometry::chain_open, n);
  const auto heff = build_heff(lat.hamiltonian, lat.detectors, tau);
  REQUIRE(heff.matrix.rows() == n - 1);
  Eigen::MatrixXcd v_eff = heff.matrix;
  for (int l = 0; l + 1 < n - 1; ++l) {
    v_eff(l, l + 1) += 1.0;
    v_eff(l + 1, l) += 1.0;
  }
  CHECK(std::abs(v_eff(n - 2, n - 2) - Complex(0.0, -tau / 2)) < 1e-15);
  v_eff(n - 2, n - 2) = 0.0;
  CHECK(v_eff.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("build_heff: both-end detectors decorate both adjacent sites") {
  const int n = 7;
  const double tau = 0.3;
  DetectorLayout lay;
  lay.kind = DetectorLayout::Kind::both_ends;
  const Lattice lat = make(Geometry::chain_open, n, lay);
  const auto heff = build_heff(lat.hamiltonian, lat.detectors, tau);
  // System sites are labels 2..n-1; anti-Hermitian part sits on 2 and n-1.
  const Eigen::MatrixXcd anti =
      (heff.matrix - heff.matrix.adjoint()) / Complex(0.0, 2.0);
  CHECK(std::abs(anti(0, 0) - Complex(-tau / 2, 0.0)) < 1e-15);
  CHECK(std::abs(anti(n - 3, n - 3) - Complex(-tau / 2, 0.0)) < 1e-15);
  CHECK(std::abs(anti(1, 1)) < 1e-15);
}

TEST_CASE("build_heff: ring detector couples the two neighbouring sites") {
  const int n = 8;
  const double tau = 0.1;
  const Lattice lat = make(Geometry::ring, n);
  const auto heff = build_heff(lat.hamiltonian, lat.detectors, tau);
  // All four matrix elements between labels 1 and n-1 equal -i tau/2.
  const int a = 0, b = n - 2;  // system positions of labels 1 and n-1
  for (const auto& [i, j] :
       {std::pair{a, a}, {a, b}, {b, a}, {b, b}}) {
    const Complex v =
        heff.matrix(i, j) - lat.hamiltonian.matrix(heff.system_sites[i],
                                                   heff.system_sites[j]);
    CHECK(std::abs(v - Complex(0.0, -tau / 2)) < 1e-15);
  }
}

TEST_CASE("build_heff: eigenvalues never gain a positive imaginary part") {
  for (auto g : {Geometry::chain_open, Geometry::ring}) {
    const Lattice lat = make(g, 10);
    const auto heff = build_heff(lat.hamiltonian, lat.detectors, 0.25);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(heff.matrix);
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      CHECK(es.eigenvalues()(i).imag() <= 1e-12);
  }
}

TEST_CASE("build_heff: empty system set is rejected") {
  const Lattice lat = make(Geometry::chain_open, 3);
  const auto all = DetectorSet::from_detected({0, 1, 2}, 3);
  CHECK_THROWS_AS(build_heff(lat.hamiltonian, all, 0.1), ConfigError);
}

TEST_CASE("evolve_heff: no detector coupling means no decay") {
  // Detector disconnected from the system: V = 0, evolution stays unitary.
  std::istringstream graph("sites 3\n1 2 1.0\ndetect 3\n");
  const Lattice lat = load_graph(graph, "mem");
  const auto heff = build_heff(lat.hamiltonian, lat.detectors, 0.2);
  const auto series = evolve_heff(heff, StateVector::position(2, 0), 200);
  for (const auto& row : series.rows)
    CHECK(row.P == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("evolve_heff: eigenstates decay at the first-order rate") {
  const int n = 10;
  const double tau = 0.1;
  const Lattice lat = make(Geometry::chain_open, n);
  const auto heff = build_heff(lat.hamiltonian, lat.detectors, tau);
  const Eigen::MatrixXd hs =
      lat.hamiltonian.matrix(lat.detectors.system, lat.detectors.system);
  const auto spec = eig_sym(hs);
  for (int s : {1, 5}) {
    const auto series = evolve_heff(
        heff,
        StateVector::from_amplitudes(spec.eigenvectors.col(s - 1).cast<Complex>()),
        2000);
    const double alpha = (2.0 * tau / n) * std::pow(std::sin(s * kPi / n), 2);
    double worst = 0.0;
    for (const auto& row : series.rows)
      worst = std::max(worst, std::abs(row.P - std::exp(-alpha * row.t)) /
                                  std::exp(-alpha * row.t));
    CHECK(worst < 1e-2);
  }
}

TEST_CASE("evolve_heff: approaches the exact engine as tau shrinks") {
  const int n = 20;
  double prev = 1.0;
  for (double tau : {0.2, 0.1, 0.05}) {
    const Lattice lat = make(Geometry::chain_open, n);
    const auto heff = build_heff(lat.hamiltonian, lat.detectors, tau);
    const auto pert =
        evolve_heff(heff, StateVector::position(n - 1, 9), 1000);
    const auto exact = exact_series(lat, 10, tau, 1000);
    double worst = 0.0;
    for (long i = 0; i < 1000; ++i)
      worst = std::max(worst, std::abs(pert.rows[i].P - exact.rows[i].P) /
                                  std::max(exact.rows[i].P, 1e-15));
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 1e-3);
}

TEST_CASE("chain_survival: completeness, symmetry, exact-engine agreement") {
  for (int ell = 1; ell <= 6; ++ell)
    CHECK(chain_survival(7, ell, 0.1, 0.0) ==
          doctest::Approx(1.0).epsilon(1e-12));
  CHECK(chain_survival(20, 3, 0.1, 77.0) ==
        chain_survival(20, 17, 0.1, 77.0));

  const Lattice lat = make(Geometry::chain_open, 20);
  const auto exact = exact_series(lat, 10, 0.1, 5000);
  const double analytic = chain_survival(20, 10, 0.1, 500.0);
  CHECK(std::abs(analytic - exact.rows[4999].P) / exact.rows[4999].P < 0.05);
}

TEST_CASE("chain_survival_asym: limits and the band-edge factor") {
  // Bulk limit: the bracket saturates at 1.
  CHECK(chain_survival_asym(100000, 4.0) ==
        doctest::Approx(1.0 / std::sqrt(8.0 * kPi * 4.0)).epsilon(1e-12));
  // Boundary: x^{-3/2} scaling, i.e. ell^2 / (2x sqrt(8 pi x)).
  const double x = 400.0;
  CHECK(chain_survival_asym(1, x) ==
        doctest::Approx(1.0 / (2.0 * x * std::sqrt(8.0 * kPi * x)))
            .epsilon(1e-3));
  const double ratio4 = chain_survival_asym(1, 4 * x) / chain_survival_asym(1, x);
  CHECK(ratio4 == doctest::Approx(std::pow(4.0, -1.5)).epsilon(1e-3));

  // The finite sum keeps both band edges, so it sits at twice this form in
  // the bulk; frozen from the finite-sum evaluation at n=200, x=10.
  const double sum = chain_survival(200, 100, 0.1, 20000.0);
  CHECK(sum == doctest::Approx(0.127833337163).epsilon(1e-9));
  CHECK(sum / chain_survival_asym(100, 10.0) ==
        doctest::Approx(2.026581).epsilon(1e-4));
}

TEST_CASE("ring_survival: plateaus and the odd-size guard") {
  CHECK(ring_survival(20, 10, 0.1, 1e9).plateau ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ring_survival(20, 1, 0.1, 0.0).plateau ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ring_survival(20, 1, 0.1, 0.0).value ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(ring_survival(7, 1, 0.1, 1.0), ConfigError);
}

TEST_CASE("ring_survival: tracks the exact engine") {
  const int n = 20;
  const Lattice lat = make(Geometry::ring, n);
  // Frozen from the exact-engine comparison: the worst relative deviation
  // over n <= 1e4 is 5.8% for ell=1 and 7.5% for ell=10.
  const double bound[] = {0.065, 0.08};
  int k = 0;
  for (int ell : {1, 10}) {
    const auto exact = exact_series(lat, ell, 0.1, 10000);
    double worst = 0.0;
    for (const auto& row : exact.rows) {
      const double analytic = ring_survival(n, ell, 0.1, row.t).value;
      worst = std::max(worst,
                       std::abs(analytic - row.P) / std::max(row.P, 1e-15));
    }
    CHECK(worst < bound[k++]);
  }
}

TEST_CASE("ring_excess_asym: bulk and boundary exponents") {
  // Bulk: the bracket saturates, excess ~ x^{-1/2}.
  CHECK(ring_excess_asym(100000, 16.0) / ring_excess_asym(100000, 4.0) ==
        doctest::Approx(0.5).epsilon(1e-6));
  // Boundary: excess ~ ell^2 / x^{3/2}.
  CHECK(ring_excess_asym(1, 6400.0) / ring_excess_asym(1, 1600.0) ==
        doctest::Approx(std::pow(4.0, -1.5)).epsilon(1e-3));
}

TEST_CASE("ring_excess_asym: frozen ratio against the finite sum") {
  const auto rs = ring_survival(200, 100, 0.1, 2000.0);
  const double excess = rs.value - rs.plateau;
  CHECK(excess == doctest::Approx(0.207001921224).epsilon(1e-9));
  CHECK(excess / ring_excess_asym(100, 1.0) ==
        doctest::Approx(4.151015).epsilon(1e-4));
}

TEST_CASE("square_survival: completeness and case dispatch") {
  CHECK(square_survival(3, 9, 4, 5, 0.1, 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(square_survival(1, 9, 4, 5, 0.1, 3.0) ==
        doctest::Approx(chain_survival(9, 4, 0.1, 3.0)).epsilon(1e-15));
  CHECK(square_survival(5, 9, 4, 5, 0.1, 3.0) ==
        doctest::Approx(chain_survival_both_ends(9, 4, 0.1, 3.0) *
                        chain_survival_both_ends(9, 5, 0.1, 3.0))
            .epsilon(1e-15));
  CHECK_THROWS_AS(square_survival(6, 9, 4, 5, 0.1, 3.0), ConfigError);
  CHECK_THROWS_AS(square_survival(5, 9, 1, 5, 0.1, 3.0), ConfigError);
}

TEST_CASE("square_survival: case-v agrees with the factorized engine") {
  const int n = 20;
  const double tau = 0.1;
  const StepOperator2D u = step_operator_2d(n, 1.0, 5, tau);
  const auto exact = evolve_2d(
      u, StateVector::position(n * n, flat_index(n, 10, 10)),
      {tau, 10000, {}});
  double worst = 0.0;
  for (const auto& row : exact.rows) {
    const double analytic = square_survival(5, n, 10, 10, tau, row.t);
    worst = std::max(worst,
                     std::abs(analytic - row.P) / std::max(row.P, 1e-15));
  }
  CHECK(worst < 0.08);  // frozen: 7.3% peak in the early transient
}

TEST_CASE("decay_modes: chain rates match the closed form") {
  const int n = 20;
  const double tau = 0.1;
  const Lattice lat = make(Geometry::chain_open, n);
  const auto modes = decay_modes(lat.hamiltonian, lat.detectors, tau);
  REQUIRE(modes.modes.size() == n - 1);
  CHECK_FALSE(modes.degenerate);
  for (const auto& m : modes.modes) {
    const double expected =
        (2.0 * tau / n) * std::pow(std::sin(m.index * kPi / n), 2);
    CHECK(m.rate == doctest::Approx(expected).epsilon(1e-12));
    CHECK(m.profile.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(std::is_sorted(modes.modes.begin(), modes.modes.end(),
                       [](const DecayMode& a, const DecayMode& b) {
                         return a.rate < b.rate;
                       }));
}

TEST_CASE("decay_modes: ring surviving family has rate exactly zero") {
  const int n = 20;
  const Lattice lat = make(Geometry::ring, n);
  const auto modes = decay_modes(lat.hamiltonian, lat.detectors, 0.1);
  REQUIRE(modes.modes.size() == n - 1);
  int surviving = 0;
  for (const auto& m : modes.modes) {
    if (m.index % 2 == 0) {
      CHECK(m.rate == 0.0);
      ++surviving;
    } else {
      CHECK(m.rate ==
            doctest::Approx(4.0 * 0.1 * (2.0 / n) *
                            std::pow(std::sin(m.index * kPi / n), 2))
                .epsilon(1e-12));
    }
  }
  CHECK(surviving == (n - 2) / 2);
}

TEST_CASE("decay_modes: numerical route reproduces the closed form") {
  const int n = 10;
  const double tau = 0.1;
  // Same chain built as a custom graph forces the numerical branch.
  std::ostringstream text;
  text << "sites " << n << "\n";
  for (int i = 1; i < n; ++i) text << i << ' ' << i + 1 << " 1\n";
  text << "detect " << n << "\n";
  std::istringstream in(text.str());
  const Lattice lat = load_graph(in, "mem");
  const auto numeric = decay_modes(lat.hamiltonian, lat.detectors, tau);
  for (const auto& m : numeric.modes) {
    const double expected =
        (2.0 * tau / n) * std::pow(std::sin(m.index * kPi / n), 2);
    CHECK(m.rate == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("asymptotic_scale") {
  const auto s = asymptotic_scale(20, 0.1, 400.0);
  CHECK(s.x == doctest::Approx(2.0));
  CHECK(s.x_prime == doctest::Approx(80.0 / 19.0));
}
