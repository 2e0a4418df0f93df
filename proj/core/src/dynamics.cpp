#include "qdet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace qdet {

namespace {

// Round-off band: anything below -kProbFloor is a bug, anything inside it
// gets clamped to the unit interval.
constexpr double kProbFloor = 1e-9;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void check_normalized(const StateVector& psi) {
  if (std::abs(psi.norm_sq - 1.0) > 1e-12)
    throw ConsistencyError("evolve: initial state is not normalized");
}

void check_protocol(const MeasurementProtocol& proto) {
  if (!(proto.tau > 0.0)) throw ConfigError("protocol: tau must be > 0");
  if (proto.n_max < 1) throw ConfigError("protocol: n_max must be >= 1");
}

// Shared stepping loop; step() advances the state and returns its squared
// norm, grab() copies the current state for a snapshot.
template <typename Step, typename Grab>
SurvivalSeries run_steps(const MeasurementProtocol& proto, Step step,
                         Grab grab) {
  std::unordered_set<long> wanted(proto.snapshot_times.begin(),
                                  proto.snapshot_times.end());
  SurvivalSeries out;
  out.rows.reserve(static_cast<std::size_t>(proto.n_max));
  double prev = 1.0;
  for (long n = 1; n <= proto.n_max; ++n) {
    const double norm_sq = step();
    const double p = prev - norm_sq;
    if (norm_sq < -kProbFloor || p < -kProbFloor ||
        norm_sq > 1.0 + kProbFloor) {
      std::ostringstream os;
      os << "evolve: probability out of tolerance at n=" << n
         << " (P=" << norm_sq << ", p=" << p << ")";
      throw ConsistencyError(os.str());
    }
    out.rows.push_back({n, static_cast<double>(n) * proto.tau,
                        clamp01(norm_sq), clamp01(p)});
    prev = norm_sq;
    if (wanted.count(n)) out.snapshots.emplace_back(n, grab(norm_sq));
  }
  return out;
}

}  // namespace

StateVector StateVector::position(int n_sites, int index0) {
  if (index0 < 0 || index0 >= n_sites)
    throw ConfigError("position state index out of range");
  StateVector psi;
  psi.amplitudes = Eigen::VectorXcd::Zero(n_sites);
  psi.amplitudes(index0) = 1.0;
  psi.norm_sq = 1.0;
  return psi;
}

StateVector StateVector::from_amplitudes(Eigen::VectorXcd a) {
  StateVector psi;
  psi.norm_sq = a.squaredNorm();
  psi.amplitudes = std::move(a);
  return psi;
}

StepOperator step_operator(const Hamiltonian& h, const DetectorSet& d,
                           double tau) {
  if (!(tau > 0.0)) throw ConfigError("step_operator: tau must be > 0");
  StepOperator u;
  u.matrix = propagator(eig_sym(h.matrix), tau);
  u.detected = d.detected;
  for (int row : u.detected) u.matrix.row(row).setZero();
  return u;
}

SurvivalSeries evolve(const StepOperator& u, const StateVector& psi0,
                      const MeasurementProtocol& proto) {
  check_protocol(proto);
  check_normalized(psi0);
  Eigen::VectorXcd psi = psi0.amplitudes;
  Eigen::VectorXcd next(psi.size());
  return run_steps(
      proto,
      [&] {
        next.noalias() = u.matrix * psi;
        psi.swap(next);
        return psi.squaredNorm();
      },
      [&](double norm_sq) {
        StateVector snap;
        snap.amplitudes = psi;
        snap.norm_sq = norm_sq;
        return snap;
      });
}

StepOperator2D step_operator_2d(int n, double gamma, int case_id, double tau) {
  if (!(tau > 0.0)) throw ConfigError("step_operator_2d: tau must be > 0");
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l + 1 < n; ++l) chain(l, l + 1) = chain(l + 1, l) = -gamma;
  const Eigen::MatrixXcd u = propagator(eig_sym(chain), tau);

  Eigen::MatrixXcd end_masked = u;       // B U: detector at the last site
  end_masked.row(n - 1).setZero();
  Eigen::MatrixXcd both_masked = u;      // B' U: detectors at both ends
  both_masked.row(0).setZero();
  both_masked.row(n - 1).setZero();

  StepOperator2D out;
  out.n = n;
  switch (case_id) {
    case 1: out.x_factor = end_masked;  out.y_factor = u;           break;
    case 2: out.x_factor = both_masked; out.y_factor = u;           break;
    case 3: out.x_factor = end_masked;  out.y_factor = end_masked;  break;
    case 4: out.x_factor = both_masked; out.y_factor = end_masked;  break;
    case 5: out.x_factor = both_masked; out.y_factor = both_masked; break;
    default:
      throw ConfigError("step_operator_2d: case must be 1..5");
  }
  return out;
}

SurvivalSeries evolve_2d(const StepOperator2D& u, const StateVector& psi0,
                         const MeasurementProtocol& proto) {
  check_protocol(proto);
  check_normalized(psi0);
  const int n = u.n;
  if (psi0.amplitudes.size() != static_cast<Eigen::Index>(n) * n)
    throw ConfigError("evolve_2d: state size does not match the lattice");

  using RowMajor =
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor psi =
      Eigen::Map<const RowMajor>(psi0.amplitudes.data(), n, n);
  RowMajor scratch(n, n);
  return run_steps(
      proto,
      [&] {
        // (X (x) Y) vec(psi) reshapes to X psi Y^T.
        scratch.noalias() = u.x_factor * psi * u.y_factor.transpose();
        psi.swap(scratch);
        return psi.squaredNorm();
      },
      [&](double norm_sq) {
        StateVector snap;
        snap.amplitudes =
            Eigen::Map<const Eigen::VectorXcd>(psi.data(), psi.size());
        snap.norm_sq = norm_sq;
        return snap;
      });
}

DetectionStats first_detection_stats(const SurvivalSeries& s) {
  if (s.rows.empty())
    throw ConfigError("first_detection_stats: empty series");
  DetectionStats stats;
  double weighted = 0.0;
  for (const auto& row : s.rows) {
    stats.total += row.p;
    weighted += static_cast<double>(row.n) * row.p;
  }
  if (stats.total >= 1e-12) stats.mean_n = weighted / stats.total;
  return stats;
}

}  // namespace qdet
