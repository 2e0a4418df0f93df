#include "qdet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace qdet {

namespace {

struct Line {
  double slope, intercept, slope_err;
  int n;
};

// OLS with slope standard error from the residual variance.
Line least_squares(const std::vector<double>& xs,
                   const std::vector<double>& ys) {
  const int n = static_cast<int>(xs.size());
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ssr += r * r;
  }
  const double var = n > 2 ? ssr / (n - 2) : 0.0;
  return {slope, intercept, std::sqrt(var / sxx), n};
}

Line fit_excess(const SurvivalSeries& s, FitWindow window, double plateau,
                bool log_abscissa, const char* what) {
  if (!(window.t_min < window.t_max))
    throw ConfigError(std::string(what) + ": empty window");
  std::vector<double> xs, ys;
  for (const auto& row : s.rows) {
    if (row.t < window.t_min || row.t > window.t_max) continue;
    const double excess = row.P - plateau;
    if (!(excess > 0.0)) {
      std::ostringstream os;
      os << what << ": non-positive excess P - plateau at n=" << row.n
         << " (P=" << row.P << ", plateau=" << plateau << ")";
      throw ConfigError(os.str());
    }
    xs.push_back(log_abscissa ? std::log(row.t) : row.t);
    ys.push_back(std::log(excess));
  }
  if (xs.size() < 5) {
    std::ostringstream os;
    os << what << ": only " << xs.size() << " points in window, need >= 5";
    throw ConfigError(os.str());
  }
  return least_squares(xs, ys);
}

}  // namespace

PowerLawFit fit_power_law(const SurvivalSeries& s, FitWindow window,
                          double plateau) {
  const Line line = fit_excess(s, window, plateau, true, "fit_power_law");
  return {line.slope, line.intercept, line.slope_err, window, line.n};
}

ExponentialFit fit_exponential(const SurvivalSeries& s, FitWindow window,
                               double plateau) {
  const Line line = fit_excess(s, window, plateau, false, "fit_exponential");
  return {-line.slope, line.intercept, line.slope_err, window, line.n};
}

PlateauEstimate estimate_plateau(const SurvivalSeries& s,
                                 double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 0.5)
    throw ConfigError("estimate_plateau: tail fraction must be in (0, 0.5]");
  const auto len = static_cast<long>(s.rows.size());
  const long n_tail = std::max<long>(
      1, static_cast<long>(std::floor(tail_fraction * len)));
  if (len < 2 || n_tail < 1)
    throw ConfigError("estimate_plateau: series too short");

  double mean = 0.0;
  for (long i = len - n_tail; i < len; ++i) mean += s.rows[i].P;
  mean /= n_tail;
  double var = 0.0;
  for (long i = len - n_tail; i < len; ++i) {
    const double d = s.rows[i].P - mean;
    var += d * d;
  }
  return {mean, std::sqrt(var / n_tail), static_cast<int>(n_tail)};
}

ComparisonReport compare_series(const SurvivalSeries& a,
                                const SurvivalSeries& b, bool resample) {
  std::vector<double> bp;
  bp.reserve(a.rows.size());
  if (!resample) {
    if (a.rows.size() != b.rows.size())
      throw ConfigError("compare_series: sample grids differ in length");
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      if (a.rows[i].n != b.rows[i].n ||
          std::abs(a.rows[i].t - b.rows[i].t) > 1e-9)
        throw ConfigError("compare_series: sample grids do not match");
      bp.push_back(b.rows[i].P);
    }
  } else {
    // Linear interpolation of b's survival onto a's time grid.
    if (b.rows.size() < 2)
      throw ConfigError("compare_series: series b too short to resample");
    for (const auto& row : a.rows) {
      const double t = row.t;
      if (t < b.rows.front().t || t > b.rows.back().t)
        throw ConfigError("compare_series: resample target outside range");
      auto hi = std::lower_bound(
          b.rows.begin(), b.rows.end(), t,
          [](const SurvivalRow& r, double v) { return r.t < v; });
      if (hi == b.rows.begin()) {
        bp.push_back(hi->P);
        continue;
      }
      auto lo = hi - 1;
      const double w = (t - lo->t) / (hi->t - lo->t);
      bp.push_back(lo->P + w * (hi->P - lo->P));
    }
  }

  ComparisonReport rep;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double abs_err = std::abs(a.rows[i].P - bp[i]);
    const double rel_err = abs_err / std::max(std::abs(a.rows[i].P), 1e-15);
    sum_sq += abs_err * abs_err;
    rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
    if (rel_err > rep.max_rel_err) {
      rep.max_rel_err = rel_err;
      rep.argmax_n = a.rows[i].n;
    }
  }
  rep.rms_err = a.rows.empty() ? 0.0 : std::sqrt(sum_sq / a.rows.size());
  return rep;
}

}  // namespace qdet
