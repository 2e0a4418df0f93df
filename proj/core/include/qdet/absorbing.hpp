// absorbing.hpp — continuous evolution under a large imaginary potential on
// the detector sites, and the tau * gamma * Gamma = 2 correspondence with
// the stroboscopic measurement dynamics.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "qdet/dynamics.hpp"
#include "qdet/lattice.hpp"

namespace qdet {

// H_NH = H - i gamma Gamma sum_{a in D} |a><a|. Defined on the full site
// space, detector sites included.
struct AbsorbingHamiltonian {
  Eigen::MatrixXcd matrix;
  double gamma = 1.0;
  double Gamma = 0.0;  // dimensionless absorption strength
  DetectorSet detected;
};

AbsorbingHamiltonian build_hnh(const Hamiltonian& h, const DetectorSet& d,
                               double Gamma);

// psi(t) = exp(-i H_NH t) psi(0) sampled on the grid. A uniform grid uses
// one precomputed step exponential so samples align exactly with the
// stroboscopic engine; non-uniform grids get per-segment exponentials.
// Row i holds n = i+1, t = grid[i]; p is the drop from the previous sample.
SurvivalSeries evolve_hnh(const AbsorbingHamiltonian& a,
                          const StateVector& psi0,
                          std::span<const double> t_grid);

// The correspondence tau / 2 = 1 / (gamma Gamma).
double gamma_for_tau(double gamma, double tau);   // -> Gamma = 2/(gamma tau)
double tau_for_gamma(double gamma, double Gamma); // -> tau = 2/(gamma Gamma)

// The mapping is derived for Gamma >> 1 and tau gamma << 1; these are
// advisory flags, not hard errors, so breakdown studies stay possible.
struct MappingValidity {
  bool gamma_large;  // Gamma >= 10
  bool tau_small;    // tau * gamma <= 0.1
};
MappingValidity mapping_validity(double gamma, double tau, double Gamma);

// Strong/weak equivalence: an open n-site chain with potential -iV at site
// n evolves like an open (n-1)-site chain with potential -i/V at site n-1.
// Both systems start from |ell> and are compared on the grid.
struct CorollaryReport {
  double v = 0.0;
  int ell = 0;
  double max_rel_dev = 0.0;
  double max_abs_dev = 0.0;
  double t_at_max = 0.0;  // grid time of the largest relative deviation
};

CorollaryReport strong_weak_corollary_check(int n_sites, double v, int ell,
                                            std::span<const double> t_grid);

}  // namespace qdet
