#pragma once

#include <utility>
#include <vector>

#include "betamrf/mcmc.hpp"
#include "betamrf/rnd_curve.hpp"
#include "betamrf/types.hpp"

namespace betamrf {

// Covariates used to evaluate the calibration mean mu_jt for one forecast:
// own lagged PITs (lag 1 first) and the contemporaneous neighbor PITs
// available at forecast time (filtering convention).
struct ConditioningInfo {
  std::vector<double> own_lags;
  std::vector<std::pair<int, double>> neighbor_pits;  // (site, value)
};

// Physical (calibrated) density on a strike grid: pointwise posterior mean
// with a 95% equal-tailed band across draws.
struct CalibratedCurve {
  std::vector<double> strikes;
  std::vector<double> pdf_mean;
  std::vector<double> pdf_lo;
  std::vector<double> pdf_hi;
  std::vector<double> cdf_mean;
};

// Per-site PIT-uniformity diagnostic: empirical CDFs of the raw and the
// calibrated PITs on a 101-point grid, plus the underlying samples.
struct PitEcdf {
  std::vector<double> u;           // 101 points in [0,1]
  std::vector<double> ecdf_uncal;
  std::vector<double> ecdf_cal;
  std::vector<double> uncal_sample;
  std::vector<double> cal_sample;
};

// Beta pdf / regularized CDF in the mean/precision parameterization.
double beta_pdf(double u, const BetaLocalParams& params);
double beta_cdf(double u, const BetaLocalParams& params);

// Deforms a risk-neutral curve into the calibrated physical curve
// f^P(x) = beta_pdf(F^Q(x); mu_jt, gamma_j) * f^Q(x), one deformation per
// posterior draw, aggregated pointwise. Analytic input curves are sampled on
// a uniform grid spanning their [1e-4, 1-1e-4] quantiles.
CalibratedCurve calibrate_density(const RndCurve& rnd, const ChainOutput& draws, int j,
                                  const ConditioningInfo& cond, int grid_size = 500);

// Transforms each in-sample PIT through the fitted beta CDF at the
// posterior-mean parameters and tabulates empirical CDFs per site.
std::vector<PitEcdf> calibrated_pit_cdf(const PitPanel& panel, const ChainOutput& draws,
                                        const NeighborhoodSystem& nbhd);

// Kolmogorov-Smirnov distance between the sample's empirical CDF and the
// uniform CDF on [0,1].
double ks_distance(const std::vector<double>& sample);

}  // namespace betamrf
