#pragma once

#include <vector>

#include "betamrf/rng.hpp"
#include "betamrf/types.hpp"

namespace betamrf {

// Logistic link, input clamped to [-35, 35] so the mean never saturates to
// exactly 0 or 1.
double logistic_link(double x);

/// Linear predictor + link from explicitly supplied covariates: own lags
// (lag 1 first) and contemporaneous neighbor PITs as (site, value) pairs.
// The result is clamped to [1e-8, 1-1e-8] so both beta shapes stay positive.
double mu_from_inputs(const ThetaState& theta, int j, const std::vector<double>& own_lags,
                      const std::vector<std::pair<int, double>>& neighbor_pits);

// Calibration mean mu_jt at site j, time t (0-based; requires t >= p).
double compute_mu(const ThetaState& theta, const PitPanel& panel, const NeighborhoodSystem& nbhd,
                  int j, int t);

// Log density of the mean/precision beta local term at y in (0,1).
double log_beta_local(double y, const BetaLocalParams& params);

// Sum of per-(t,j) local beta log densities over t = p..T-1, conditioning on
// the first p rows. For Markov and Independent topologies this is the exact
// joint log density (Z_t = 1); under Proximity the unknown log Z_t terms are
// dropped and handled by the exchange acceptance ratio.
double pseudo_log_likelihood(const ThetaState& theta, const PitPanel& panel,
                             const NeighborhoodSystem& nbhd);

// Hierarchical prior log density, including the log-Jacobian of the
// sigma = log(gamma) re-parameterization.
double log_prior(const ThetaState& theta, const HyperParams& hyper);

// pseudo_log_likelihood + log_prior (no Z terms, no f^Q Jacobian terms).
double unnormalized_log_posterior(const ThetaState& theta, const PitPanel& panel,
                                  const NeighborhoodSystem& nbhd, const HyperParams& hyper);

// Forward-simulates a panel from the model by ancestral sampling. Only valid
// for topologies with a sequential factorization (Independent, Markov); the
// first p rows are iid uniforms.
PitPanel simulate_mrf_panel(const ThetaState& theta, const NeighborhoodSystem& nbhd, int rows,
                            Rng& rng);

}  // namespace betamrf
