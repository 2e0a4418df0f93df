#include "qdet/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qdet {

namespace {

constexpr double kPi = std::numbers::pi;

bool detected_is(const DetectorSet& d, std::vector<int> sites) {
  return d.detected == sites;
}

void require_system_label(int ell, int lo, int hi, const char* what) {
  if (ell < lo || ell > hi) {
    throw ConfigError(std::string(what) + ": initial site " +
                      std::to_string(ell) + " outside system range " +
                      std::to_string(lo) + ".." + std::to_string(hi));
  }
}

}  // namespace

EffectiveHamiltonian build_heff(const Hamiltonian& h, const DetectorSet& d,
                                double tau) {
  if (!(tau > 0.0)) throw ConfigError("build_heff: tau must be > 0");
  if (d.system.empty()) throw ConfigError("build_heff: empty system set");

  EffectiveHamiltonian heff;
  heff.tau = tau;
  heff.system_sites = d.system;
  const Eigen::MatrixXd hs = h.matrix(d.system, d.system);
  heff.matrix = hs.cast<Complex>();
  if (!d.detected.empty()) {
    const Eigen::MatrixXd v = h.matrix(d.system, d.detected);
    heff.matrix.noalias() +=
        Complex(0.0, -0.5 * tau) * (v * v.transpose()).cast<Complex>();
  }
  return heff;
}

SurvivalSeries evolve_heff(const EffectiveHamiltonian& heff,
                           const StateVector& psi0_system, long n_max) {
  if (psi0_system.amplitudes.size() !=
      static_cast<Eigen::Index>(heff.system_sites.size()))
    throw ConfigError("evolve_heff: state size does not match the system");
  const Eigen::MatrixXcd step = expm(Complex(0.0, -heff.tau) * heff.matrix);
  StepOperator u{step, {}};
  return evolve(u, psi0_system, {heff.tau, n_max, {}});
}

double chain_survival(int n, int ell, double tau, double t) {
  require_system_label(ell, 1, n - 1, "chain_survival");
  double sum = 0.0;
  for (int s = 1; s <= n - 1; ++s) {
    const double amp = std::sin(s * kPi * ell / n);
    const double mode = std::sin(s * kPi / n);
    sum += (2.0 / n) * amp * amp *
           std::exp(-(2.0 * tau * t / n) * mode * mode);
  }
  return sum;
}

double chain_survival_asym(int ell, double x) {
  if (!(x > 0.0)) throw ConfigError("chain_survival_asym: x must be > 0");
  return (1.0 - std::exp(-static_cast<double>(ell) * ell / (2.0 * x))) /
         std::sqrt(8.0 * kPi * x);
}

double chain_survival_both_ends(int n, int ell, double tau, double t) {
  require_system_label(ell, 2, n - 1, "chain_survival_both_ends");
  const int m = n - 1;
  double sum = 0.0;
  for (int s = 1; s <= n - 2; ++s) {
    const double amp = std::sin(s * kPi * (ell - 1) / m);
    const double mode = std::sin(s * kPi / m);
    sum += (2.0 / m) * amp * amp *
           std::exp(-(4.0 * tau * t / m) * mode * mode);
  }
  return sum;
}

RingSurvival ring_survival(int n, int ell, double tau, double t) {
  if (n % 2 != 0)
    throw ConfigError("ring_survival: closed form assumes even n");
  require_system_label(ell, 1, n, "ring_survival");

  double plateau = 0.0;
  for (int s = 1; s <= n / 2 - 1; ++s) {
    const double amp = std::sin(2.0 * s * ell * kPi / n);
    plateau += (2.0 / n) * amp * amp;
  }
  double excess = 0.0;
  for (int s = 0; s <= n / 2 - 1; ++s) {
    const int k = 2 * s + 1;
    const double amp = std::sin(k * ell * kPi / n);
    const double node = std::sin(k * kPi / n);
    const double rate = 4.0 * tau * (2.0 / n) * node * node;
    excess += (2.0 / n) * amp * amp * std::exp(-rate * t);
  }
  return {plateau + excess, plateau};
}

double ring_excess_asym(int ell, double x) {
  if (!(x > 0.0)) throw ConfigError("ring_excess_asym: x must be > 0");
  return (1.0 - std::exp(-static_cast<double>(ell) * ell / (8.0 * x))) /
         (8.0 * std::sqrt(2.0 * kPi * x));
}

double square_survival(int case_id, int n, int ellx, int elly, double tau,
                       double t) {
  switch (case_id) {
    case 1:
      require_system_label(elly, 1, n, "square_survival");
      return chain_survival(n, ellx, tau, t);
    case 2:
      require_system_label(elly, 1, n, "square_survival");
      return chain_survival_both_ends(n, ellx, tau, t);
    case 3:
      return chain_survival(n, ellx, tau, t) *
             chain_survival(n, elly, tau, t);
    case 4:
      return chain_survival_both_ends(n, ellx, tau, t) *
             chain_survival(n, elly, tau, t);
    case 5:
      return chain_survival_both_ends(n, ellx, tau, t) *
             chain_survival_both_ends(n, elly, tau, t);
    default:
      throw ConfigError("square_survival: case must be 1..5");
  }
}

AsymptoticScale asymptotic_scale(int n, double tau, double t) {
  return {t * tau / n, 2.0 * t * tau / (n - 1)};
}

DecayModes decay_modes(const Hamiltonian& h, const DetectorSet& d,
                       double tau) {
  if (!(tau > 0.0)) throw ConfigError("decay_modes: tau must be > 0");
  if (d.system.empty()) throw ConfigError("decay_modes: empty system set");

  const int n = h.n_sites();
  const double g2 = h.gamma * h.gamma;
  DecayModes out;

  const bool end_chain = h.geometry == Geometry::chain_open &&
                         detected_is(d, {n - 1});
  const bool end_ring =
      h.geometry == Geometry::ring && detected_is(d, {n - 1}) && n % 2 == 0;
  const bool both_chain = h.geometry == Geometry::chain_open &&
                          detected_is(d, {0, n - 1});

  if (end_chain || end_ring) {
    // System = (n-1)-site open chain; its eigenbasis is analytic. On the
    // ring the even-index modes have a node at the detector and their rate
    // is exactly zero.
    const int ns = n - 1;
    for (int s = 1; s <= ns; ++s) {
      DecayMode mode;
      mode.index = s;
      mode.energy = -2.0 * h.gamma * std::cos(s * kPi / n);
      mode.profile.resize(ns);
      for (int l = 1; l <= ns; ++l)
        mode.profile(l - 1) = std::sqrt(2.0 / n) * std::sin(s * l * kPi / n);
      if (end_ring) {
        mode.rate = (s % 2 == 0)
                        ? 0.0
                        : 4.0 * tau * g2 * mode.profile(0) * mode.profile(0);
      } else {
        const double edge = mode.profile(ns - 1);
        mode.rate = tau * g2 * edge * edge;
      }
      out.modes.push_back(std::move(mode));
    }
  } else if (both_chain) {
    const int ns = n - 2;  // system sites l = 2..n-1
    const int m = n - 1;
    for (int s = 1; s <= ns; ++s) {
      DecayMode mode;
      mode.index = s;
      mode.energy = -2.0 * h.gamma * std::cos(s * kPi / m);
      mode.profile.resize(ns);
      for (int l = 2; l <= n - 1; ++l)
        mode.profile(l - 2) =
            std::sqrt(2.0 / m) * std::sin(s * kPi * (l - 1) / m);
      const double sq = std::sin(s * kPi / m);
      mode.rate = (4.0 * tau * g2 / m) * sq * sq;
      out.modes.push_back(std::move(mode));
    }
  } else {
    // First-order numerics: rate_s = tau |V_DS phi_s|^2.
    const Eigen::MatrixXd hs = h.matrix(d.system, d.system);
    const SpectralDecomposition spec = eig_sym(hs);
    Eigen::MatrixXd v;
    if (!d.detected.empty()) v = h.matrix(d.detected, d.system);
    const double scale = std::max(
        1.0, spec.eigenvalues.cwiseAbs().maxCoeff());
    for (int s = 0; s < spec.eigenvalues.size(); ++s) {
      if (s > 0 &&
          spec.eigenvalues(s) - spec.eigenvalues(s - 1) < 1e-9 * scale)
        out.degenerate = true;
      DecayMode mode;
      mode.index = s + 1;
      mode.energy = spec.eigenvalues(s);
      mode.profile = spec.eigenvectors.col(s);
      mode.rate = d.detected.empty()
                      ? 0.0
                      : tau * (v * mode.profile).squaredNorm();
      out.modes.push_back(std::move(mode));
    }
  }

  std::stable_sort(out.modes.begin(), out.modes.end(),
                   [](const DecayMode& a, const DecayMode& b) {
                     return a.rate < b.rate;
                   });
  return out;
}

}  // namespace qdet
