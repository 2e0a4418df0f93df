// effective.hpp — perturbative non-Hermitian effective Hamiltonian on the
// system sites, plus the closed-form survival expressions for open chains,
// rings and the square-lattice boundary arrangements.
//
// The closed forms take the hopping amplitude to be 1 (their only use of
// the Hamiltonian is through the decay rates, which scale as gamma^2 tau;
// callers with gamma != 1 pass tau * gamma^2).
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "qdet/dynamics.hpp"
#include "qdet/lattice.hpp"

namespace qdet {

// H_eff = H_S + V_eff with V_eff = -(i tau / 2) V_SD V_DS; the Hermitian
// part equals H_S exactly and the anti-Hermitian part is negative
// semidefinite, so survival can only decay.
struct EffectiveHamiltonian {
  Eigen::MatrixXcd matrix;        // over system sites only
  double tau = 0.0;
  std::vector<int> system_sites;  // 0-based labels into the full lattice
};

EffectiveHamiltonian build_heff(const Hamiltonian& h, const DetectorSet& d,
                                double tau);

// Strobed evolution under H_eff: the one-step matrix exp(-i H_eff tau) is
// built once and powered, so samples align with the measurement grid.
SurvivalSeries evolve_heff(const EffectiveHamiltonian& heff,
                           const StateVector& psi0_system, long n_max);

// Open chain of n sites, detector at site n, initial position eigenstate
// ell (1 <= ell <= n-1):
//   P_ell(t) = sum_s (2/n) sin^2(s pi ell / n) exp(-(2 tau t / n)
//              sin^2(s pi / n)),  s = 1..n-1.
double chain_survival(int n, int ell, double tau, double t);

// Long-time closed form of the above, x = t tau / n:
//   P_ell = (1 / sqrt(8 pi x)) [1 - exp(-ell^2 / 2x)].
// Valid when t tau / n is large but t tau / n^3 is small. Note the finite
// sum carries contributions from both band edges, so it approaches twice
// this expression in the bulk; the exponents (-1/2 bulk, -3/2 boundary)
// are what this form predicts.
double chain_survival_asym(int ell, double x);

// Open chain of n sites with detectors at both ends, 2 <= ell <= n-1.
double chain_survival_both_ends(int n, int ell, double tau, double t);

struct RingSurvival {
  double value;    // P_ell(t)
  double plateau;  // P_ell(infinity), weight on the surviving eigenstates
};

// Ring of n sites (n even), detector at site n. Half the eigenstates have
// a node at the detector and survive forever; the plateau is their weight
// at ell: 1/2 for ell != n/2 (and != n), zero at ell = n/2.
RingSurvival ring_survival(int n, int ell, double tau, double t);

// Long-time excess over the plateau, x = t tau / n:
//   P_ell(t) - P_ell(inf) = (1 / (8 sqrt(2 pi x))) [1 - exp(-ell^2 / 8x)].
// Same band-edge caveat as chain_survival_asym.
double ring_excess_asym(int ell, double x);

// Square lattice, boundary-detector case 1..5, initial position
// (ellx, elly) inside the undetected region. Cases 1 and 2 reduce to the
// corresponding chain; cases 3-5 are products of per-axis chain survivals.
double square_survival(int case_id, int n, int ellx, int elly, double tau,
                       double t);

// Dimensionless long-time scales used by the closed forms above.
struct AsymptoticScale {
  double x;        // t tau / n          (single end detector)
  double x_prime;  // 2 t tau / (n - 1)  (detectors at both ends)
};
AsymptoticScale asymptotic_scale(int n, double tau, double t);

// First-order decay mode of H_eff: energy from H_S, rate from the
// diagonal matrix element of the anti-Hermitian part.
struct DecayMode {
  int index;               // 1-based mode label, ascending in energy
  double energy;
  double rate;             // >= 0; survival of the mode decays as e^{-rate t}
  Eigen::VectorXd profile; // amplitudes over system sites, unit norm
};

struct DecayModes {
  std::vector<DecayMode> modes;  // sorted by rate ascending
  bool degenerate = false;       // first-order rates are basis-dependent
};

// Closed-form modes for the end-detector chain and ring and the two-end
// chain (ring surviving modes get rate exactly zero); first-order numerics
// (rate = tau |V_DS phi|^2) for everything else.
DecayModes decay_modes(const Hamiltonian& h, const DetectorSet& d, double tau);

}  // namespace qdet
