#pragma once

#include <string>
#include <vector>

#include "betamrf/rng.hpp"
#include "betamrf/types.hpp"

namespace betamrf {

// Synthetic-world specification: GBM under the physical measure, lognormal
// risk-neutral curves under a (possibly mis-specified) volatility.
struct GbmSpec {
  double s0 = 100.0;
  double mu = 0.20;          // physical drift, per year
  double r = 0.05;           // risk-free rate, per year
  double sigma_true = 0.15;  // physical volatility
  double sigma_rn = 0.15;    // volatility used for the risk-neutral curves
  double horizon_years = 2.0;
  int steps_per_year = 252;

  void validate() const;
  int horizon_steps() const;
};

// Exact-discretization log-Euler GBM path: S[0] = s0, then
// S[k+1] = S[k] * exp((mu - sigma^2/2) dt + sigma sqrt(dt) eps).
// Length = horizon_steps + lookahead_days + 1, so every panel date t in
// 1..horizon_steps has S[t + d] available for the largest tenor.
std::vector<double> simulate_gbm(const GbmSpec& spec, int lookahead_days, Rng& rng);

// Lognormal risk-neutral CDF/pdf of S_{t+tau} given S_t.
double lognormal_cdf(double s_future, double s_t, double r, double sigma, double tau);
double lognormal_pdf(double s_future, double s_t, double r, double sigma, double tau);

// Rolling overlapping PIT panel: for trading day t = 1..horizon_steps and
// tenor j, PIT = lognormal_cdf(S[t + d_j], S[t], r, sigma_rn, tau_j) with
// d_j = round(tau_j * steps_per_year).
PitPanel build_pit_panel(const std::vector<double>& path, const GbmSpec& spec,
                         const MaturityGrid& grid, const std::string& start_date = "2020-01-02");

// Systematic thinning by index rounding: keeps rows round(k * factor),
// k = 0, 1, ... while inside the panel. factor = 1 is the identity;
// fractional factors (e.g. 100/15) are supported directly.
PitPanel thin_panel(const PitPanel& panel, double factor);

}  // namespace betamrf
