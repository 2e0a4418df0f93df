// meanfield.hpp — closed-form solution for the complete graph with one
// detector: hopping between every pair of sites makes the one-step operator
// rank-deficient enough to diagonalize by hand.
//
// Formulas take unit hopping; for gamma != 1 substitute tau -> gamma * tau.
// The detector sits at the last site (label n); only whether the initial
// site coincides with it matters, the rest are equivalent by symmetry.
#pragma once

#include <complex>

#include "qdet/dynamics.hpp"

namespace qdet {

struct MeanFieldSolution {
  int n_sites = 0;
  double tau = 0.0;
  Complex c;        // n / (e^{i tau n} - 1); infinite at resonance
  Complex c_inv;    // (e^{i tau n} - 1) / n, always finite
  Complex lambda2;  // the one decaying eigenvalue of B U_tau, 1 + (n-1)/c
  double x = 0.0;   // (2/n)(1 - 1/n)(1 - cos tau n) = 1 - |lambda2|^2
  double xi = 0.0;  // (2/n)(1 - cos tau n), the large-n decay exponent
  bool resonant = false;  // tau n = 0 mod 2pi: U_tau = I, x = 0
};

MeanFieldSolution mf_solve(int n_sites, double tau);

// Exact series. ell != n:
//   p_n = (x/(n-1)) (1-x)^{n-1},  P_n = 1 - (1 - (1-x)^n)/(n-1).
// ell = n (initial state on the detector):
//   p_1 = 1-x, P_n = x (1-x)^{n-1}, p_n = x^2 (1-x)^{n-2} for n > 1.
SurvivalSeries mf_series(const MeanFieldSolution& sol, int ell, long n_max);

// Total detection probability: 1/(n-1) away from the detector, 1 on it.
double mf_total_detection(int n_sites, int ell);

// The invariant long-time state reached from |ell> (ell != n):
// amplitude (n-2)/(n-1) at ell, -1/(n-1) elsewhere, zero on the detector.
// Invariant under B U_tau for every tau, norm^2 = 1 - 1/(n-1).
StateVector mf_steady_state(int n_sites, int ell);

}  // namespace qdet
