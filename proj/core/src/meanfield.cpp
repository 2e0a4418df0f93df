#include "qdet/meanfield.hpp"

#include <cmath>
#include <limits>

namespace qdet {

MeanFieldSolution mf_solve(int n_sites, double tau) {
  if (n_sites < 2) throw ConfigError("mf_solve: n must be >= 2");
  if (!(tau > 0.0)) throw ConfigError("mf_solve: tau must be > 0");

  MeanFieldSolution sol;
  sol.n_sites = n_sites;
  sol.tau = tau;
  const double theta = tau * n_sites;
  sol.c_inv = (std::exp(Complex(0.0, theta)) - 1.0) / double(n_sites);
  // 1 - cos(theta) via the half-angle form, accurate near the resonance.
  const double s = std::sin(0.5 * theta);
  const double one_minus_cos = 2.0 * s * s;
  sol.x = (2.0 / n_sites) * (1.0 - 1.0 / n_sites) * one_minus_cos;
  sol.xi = (2.0 / n_sites) * one_minus_cos;
  sol.lambda2 = 1.0 + double(n_sites - 1) * sol.c_inv;
  sol.resonant = (std::abs(sol.c_inv) == 0.0);
  sol.c = sol.resonant
              ? Complex(std::numeric_limits<double>::infinity(), 0.0)
              : 1.0 / sol.c_inv;
  return sol;
}

SurvivalSeries mf_series(const MeanFieldSolution& sol, int ell, long n_max) {
  if (ell < 1 || ell > sol.n_sites)
    throw ConfigError("mf_series: ell out of range");
  if (n_max < 1) throw ConfigError("mf_series: n_max must be >= 1");

  const double x = sol.x;
  const double denom = sol.n_sites - 1.0;
  SurvivalSeries out;
  out.rows.reserve(static_cast<std::size_t>(n_max));

  if (ell != sol.n_sites) {
    double pw = 1.0;  // (1-x)^{n-1}
    for (long n = 1; n <= n_max; ++n) {
      const double p = (x / denom) * pw;
      pw *= (1.0 - x);
      const double big_p = 1.0 - (1.0 - pw) / denom;
      out.rows.push_back({n, n * sol.tau, big_p, p});
    }
  } else {
    double pw = 1.0;  // (1-x)^{n-2} from n = 2 on
    for (long n = 1; n <= n_max; ++n) {
      double p, big_p;
      if (n == 1) {
        p = 1.0 - x;
        big_p = x;
      } else {
        p = x * x * pw;
        pw *= (1.0 - x);
        big_p = x * pw;  // x (1-x)^{n-1}
      }
      out.rows.push_back({n, n * sol.tau, big_p, p});
    }
  }
  return out;
}

double mf_total_detection(int n_sites, int ell) {
  if (n_sites < 2 || ell < 1 || ell > n_sites)
    throw ConfigError("mf_total_detection: bad arguments");
  return ell == n_sites ? 1.0 : 1.0 / (n_sites - 1.0);
}

StateVector mf_steady_state(int n_sites, int ell) {
  if (n_sites < 2 || ell < 1 || ell > n_sites)
    throw ConfigError("mf_steady_state: bad arguments");
  if (ell == n_sites)
    throw ConfigError(
        "mf_steady_state: detection is certain from the detector site, "
        "no steady state exists");
  Eigen::VectorXcd amps =
      Eigen::VectorXcd::Constant(n_sites, -1.0 / (n_sites - 1.0));
  amps(ell - 1) = double(n_sites - 2) / (n_sites - 1);
  amps(n_sites - 1) = 0.0;
  return StateVector::from_amplitudes(std::move(amps));
}

}  // namespace qdet
