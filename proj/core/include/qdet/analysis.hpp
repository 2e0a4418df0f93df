// analysis.hpp — post-processing of survival series: power-law and
// exponential fits on a time window, plateau estimation, pointwise
// comparison metrics.
#pragma once

#include "qdet/dynamics.hpp"

namespace qdet {

struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log prefactor
  double std_err = 0.0;    // standard error of the exponent
  FitWindow window;
  int n_points = 0;
};

// Ordinary least squares of log(P - plateau) against log t over the rows
// with t inside the window. Requires at least 5 points and a strictly
// positive excess everywhere in the window (the offending n is named
// otherwise).
PowerLawFit fit_power_law(const SurvivalSeries& s, FitWindow window,
                          double plateau = 0.0);

struct ExponentialFit {
  double rate = 0.0;  // P - plateau ~ exp(-rate * t)
  double intercept = 0.0;
  double std_err = 0.0;
  FitWindow window;
  int n_points = 0;
};

// Same contract, straight line in (t, log(P - plateau)).
ExponentialFit fit_exponential(const SurvivalSeries& s, FitWindow window,
                               double plateau = 0.0);

struct PlateauEstimate {
  double value = 0.0;
  double stddev = 0.0;
  int n_tail = 0;
};

// Mean of P over the trailing fraction of the series (0 < fraction <= 0.5).
PlateauEstimate estimate_plateau(const SurvivalSeries& s,
                                 double tail_fraction);

struct ComparisonReport {
  double max_rel_err = 0.0;  // series a is the reference (denominator)
  double max_abs_err = 0.0;
  long argmax_n = 0;         // n of the largest relative error
  double rms_err = 0.0;
};

// Pointwise error metrics on P. The n grids must match exactly unless
// resample is set, in which case b is linearly interpolated onto a's
// t grid. Relative errors use max(|a_n|, 1e-15) as denominator.
ComparisonReport compare_series(const SurvivalSeries& a,
                                const SurvivalSeries& b,
                                bool resample = false);

}  // namespace qdet
