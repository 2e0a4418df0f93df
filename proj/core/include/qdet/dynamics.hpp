// dynamics.hpp — exact stroboscopic evolution: unitary steps followed by
// projection onto the undetected subspace. This is the ground-truth engine
// every other formulation is checked against.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "qdet/lattice.hpp"
#include "qdet/numerics.hpp"

namespace qdet {

struct StateVector {
  Eigen::VectorXcd amplitudes;
  double norm_sq = 0.0;

  static StateVector position(int n_sites, int index0);
  static StateVector from_amplitudes(Eigen::VectorXcd a);
};

struct MeasurementProtocol {
  double tau = 0.1;
  long n_max = 1;
  std::vector<long> snapshot_times;  // n values at which to keep |psi_n^+>
};

// Per-measurement record: survival P after n measurements and the
// first-detection probability p of the n-th one (p_n = P_{n-1} - P_n).
struct SurvivalRow {
  long n;
  double t;
  double P;
  double p;
};

struct SurvivalSeries {
  std::vector<SurvivalRow> rows;
  std::vector<std::pair<long, StateVector>> snapshots;  // un-normalized
};

// One-step operator B U_tau on the full site space; detected rows are
// identically zero.
struct StepOperator {
  Eigen::MatrixXcd matrix;
  std::vector<int> detected;
};

StepOperator step_operator(const Hamiltonian& h, const DetectorSet& d,
                           double tau);

SurvivalSeries evolve(const StepOperator& u, const StateVector& psi0,
                      const MeasurementProtocol& proto);

// Square-lattice step in factorized form: the full-space step operator is
// x_factor (x) y_factor and never gets materialized. The state is reshaped
// to an n x n array and both factors are applied per step.
struct StepOperator2D {
  Eigen::MatrixXcd x_factor;
  Eigen::MatrixXcd y_factor;
  int n = 0;  // sites per axis
};

// Factor pair for the boundary-detector arrangements case_id = 1..5 on an
// n x n lattice with hopping gamma.
StepOperator2D step_operator_2d(int n, double gamma, int case_id, double tau);

// psi0 lives on the flattened n^2-site space, index (lx-1)*n + (ly-1).
SurvivalSeries evolve_2d(const StepOperator2D& u, const StateVector& psi0,
                         const MeasurementProtocol& proto);

struct DetectionStats {
  double total = 0.0;                // sum of p_n
  std::optional<double> mean_n;      // conditioned on detection; absent if
                                     // total detection is negligible
};

DetectionStats first_detection_stats(const SurvivalSeries& s);

}  // namespace qdet
