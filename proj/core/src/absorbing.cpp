#include "qdet/absorbing.hpp"

#include <algorithm>
#include <cmath>

namespace qdet {

AbsorbingHamiltonian build_hnh(const Hamiltonian& h, const DetectorSet& d,
                               double Gamma) {
  if (Gamma < 0.0) throw ConfigError("build_hnh: Gamma must be >= 0");
  AbsorbingHamiltonian a;
  a.matrix = h.matrix.cast<Complex>();
  a.gamma = h.gamma;
  a.Gamma = Gamma;
  a.detected = d;
  for (int site : d.detected)
    a.matrix(site, site) += Complex(0.0, -h.gamma * Gamma);
  return a;
}

SurvivalSeries evolve_hnh(const AbsorbingHamiltonian& a,
                          const StateVector& psi0,
                          std::span<const double> t_grid) {
  if (t_grid.empty()) throw ConfigError("evolve_hnh: empty time grid");
  double prev_t = 0.0;
  for (double t : t_grid) {
    if (!(t >= prev_t) || !std::isfinite(t))
      throw ConfigError("evolve_hnh: grid must be ascending and >= 0");
    prev_t = t;
  }
  if (std::abs(psi0.norm_sq - 1.0) > 1e-12)
    throw ConsistencyError("evolve_hnh: initial state is not normalized");

  const double dt0 = t_grid[0];
  bool uniform = dt0 > 0.0;
  for (std::size_t i = 1; i < t_grid.size() && uniform; ++i)
    uniform = std::abs((t_grid[i] - t_grid[i - 1]) - dt0) <= 1e-12 * dt0;

  Eigen::MatrixXcd step;
  double step_len = -1.0;
  if (uniform) {
    step = expm(Complex(0.0, -dt0) * a.matrix);
    step_len = dt0;
  }

  SurvivalSeries out;
  out.rows.reserve(t_grid.size());
  Eigen::VectorXcd psi = psi0.amplitudes;
  double prev_p = 1.0;
  prev_t = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double seg = t_grid[i] - prev_t;
    if (uniform) {
      psi = step * psi;
    } else if (seg > 0.0) {
      if (seg != step_len) {
        step = expm(Complex(0.0, -seg) * a.matrix);
        step_len = seg;
      }
      psi = step * psi;
    }
    prev_t = t_grid[i];
    const double big_p = psi.squaredNorm();
    const double p = prev_p - big_p;
    if (p < -1e-9 || big_p > 1.0 + 1e-9)
      throw ConsistencyError("evolve_hnh: survival increased beyond tolerance");
    out.rows.push_back({static_cast<long>(i + 1), t_grid[i],
                        std::clamp(big_p, 0.0, 1.0), std::clamp(p, 0.0, 1.0)});
    prev_p = big_p;
  }
  return out;
}

double gamma_for_tau(double gamma, double tau) {
  if (!(gamma > 0.0) || !(tau > 0.0))
    throw ConfigError("gamma_for_tau: gamma and tau must be > 0");
  return 2.0 / (gamma * tau);
}

double tau_for_gamma(double gamma, double Gamma) {
  if (!(gamma > 0.0) || !(Gamma > 0.0))
    throw ConfigError("tau_for_gamma: gamma and Gamma must be > 0");
  return 2.0 / (gamma * Gamma);
}

MappingValidity mapping_validity(double gamma, double tau, double Gamma) {
  return {Gamma >= 10.0, tau * gamma <= 0.1};
}

CorollaryReport strong_weak_corollary_check(int n_sites, double v, int ell,
                                            std::span<const double> t_grid) {
  if (n_sites < 3) throw ConfigError("corollary check needs n >= 3");
  if (!(v > 0.0)) throw ConfigError("corollary check needs v > 0");
  if (ell < 1 || ell > n_sites - 1)
    throw ConfigError("corollary check: ell must lie in both chains");

  auto chain = [](int n) {
    LatticeSpec spec;
    spec.geometry = Geometry::chain_open;
    spec.n = n;
    spec.layout.kind = DetectorLayout::Kind::end;
    return build(spec);
  };

  const Lattice strong = chain(n_sites);
  const Lattice weak = chain(n_sites - 1);
  // -iV at site n of the n-chain; -i/V at site n-1 of the (n-1)-chain.
  // build_hnh applies -i gamma Gamma, so with gamma = 1 pass the potential.
  const AbsorbingHamiltonian a_strong =
      build_hnh(strong.hamiltonian, strong.detectors, v);
  const AbsorbingHamiltonian a_weak =
      build_hnh(weak.hamiltonian, weak.detectors, 1.0 / v);

  const SurvivalSeries s =
      evolve_hnh(a_strong, StateVector::position(n_sites, ell - 1), t_grid);
  const SurvivalSeries w =
      evolve_hnh(a_weak, StateVector::position(n_sites - 1, ell - 1), t_grid);

  CorollaryReport report;
  report.v = v;
  report.ell = ell;
  for (std::size_t i = 0; i < s.rows.size(); ++i) {
    const double abs_dev = std::abs(s.rows[i].P - w.rows[i].P);
    const double rel_dev = abs_dev / std::max(s.rows[i].P, 1e-15);
    report.max_abs_dev = std::max(report.max_abs_dev, abs_dev);
    if (rel_dev > report.max_rel_dev) {
      report.max_rel_dev = rel_dev;
      report.t_at_max = s.rows[i].t;
    }
  }
  return report;
}

}  // namespace qdet
