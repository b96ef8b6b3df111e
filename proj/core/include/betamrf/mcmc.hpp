#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "betamrf/model.hpp"
#include "betamrf/rng.hpp"
#include "betamrf/types.hpp"

namespace betamrf {

// The auxiliary pseudo-data z_{p+1:T}; same shape and constraints as the
// observed panel, first p rows copied from it.
using AuxiliaryField = PitPanel;

struct SamplerConfig {
  int n_iter = 5000;
  int n_burnin = 2000;
  int inner_sweeps = 1;
  std::vector<double> proposal_scale;  // diagonal of Lambda; empty -> default init
  bool adapt = true;
  double target_rate = 0.6;  // midpoint of the 0.5-0.7 band
  int adapt_window = 100;
  std::uint64_t seed = 1;

  // Reading of the double-MH step 1. Posterior: one random-walk MH
  // accept/reject against the unnormalized posterior, with step 2 accepting on
  // the auxiliary-likelihood correction l(z|theta) - l(z|theta') alone.
  // Prior: step 1 accepts against the prior and step 2 uses the full
  // four-term exchange ratio. Both compose to the same total ratio.
  enum class Step1Target { Posterior, Prior };
  Step1Target step1_target = Step1Target::Posterior;

  void validate() const;
};

struct ChainOutput {
  ThetaLayout layout;
  std::vector<std::string> names;
  int n_iter = 0;
  int dim = 0;
  std::vector<double> draws;  // n_iter x dim, row-major
  double accept_rate_outer = 0.0;
  double accept_rate_exchange = 0.0;
  std::vector<double> accept_rate_inner;  // per site
  std::vector<double> geweke_z;           // per coordinate (NaN if degenerate)
  double runtime_seconds = 0.0;

  double at(int it, int k) const { return draws[static_cast<std::size_t>(it) * dim + k]; }
  std::vector<double> column(int k) const;
  ThetaState posterior_mean_theta() const;
};

// Symmetric random-walk proposal theta* = theta + Lambda^{1/2} eps.
ThetaState outer_propose(const ThetaState& theta, const std::vector<double>& scale, Rng& rng);

// One full sweep of the per-site beta-proposal MH kernel over the auxiliary
// field (t = p..T-1, j = 1..M). Operates directly in PIT space; the
// F^{Q,-1} transform back to price space is the identity bookkeeping step.
// accept_counts/attempt_counts, when non-null, accumulate per-site statistics.
void gibbs_sweep_auxiliary(AuxiliaryField& field, const ThetaState& theta,
                           const NeighborhoodSystem& nbhd, Rng& rng,
                           std::vector<long>* accept_counts = nullptr,
                           std::vector<long>* attempt_counts = nullptr);

// Log of the exchange acceptance ratio
//   l(z|theta) - l(x|theta) + l(x|theta*) - l(z|theta*),
// capped at 0. All Z_t terms cancel identically in this ratio.
double exchange_accept(const ThetaState& theta, const ThetaState& theta_star, const PitPanel& panel,
                       const AuxiliaryField& aux, const NeighborhoodSystem& nbhd);

struct StepFlags {
  bool outer_accepted = false;
  bool exchange_attempted = false;
  bool exchange_accepted = false;
};

// One iteration of the double MH sampler. cur_log_target caches the step-1
// target value at theta and is updated in place on acceptance.
StepFlags double_mh_step(ThetaState& theta, double& cur_log_target, const PitPanel& panel,
                         const NeighborhoodSystem& nbhd, const HyperParams& hyper,
                         const SamplerConfig& config, const std::vector<double>& scale, Rng& rng,
                         std::vector<long>* inner_accepts = nullptr,
                         std::vector<long>* inner_attempts = nullptr);

// Robbins-Monro style scale update from a window of accept indicators:
// every entry of Lambda is multiplied by exp(c * (rate - target)) with
// c = 2.0 / sqrt(window_index). Only called during burn-in.
std::vector<double> adapt_scale(const std::vector<int>& window_accepts, int window_index,
                                std::vector<double> scale, double target_rate = 0.6);

// Geweke convergence diagnostic with a Bartlett lag-window spectral estimator
// (window = 4% of segment length). Throws on degenerate (zero-variance)
// segments.
double geweke_z(std::span<const double> column, double first_fraction = 0.1,
                double last_fraction = 0.5);

struct ParamSummary {
  std::string name;
  double mean;
  double ci_low;
  double ci_high;
};

// Posterior mean and equal-tailed credible interval per coordinate; sigma
// coordinates are reported on the original gamma = exp(sigma) scale.
std::vector<ParamSummary> summarize(const ChainOutput& chain, double prob = 0.95);

// Default Lambda diagonal: 0.01 on coefficient coordinates, 0.04 on sigmas.
std::vector<double> default_proposal_scale(const ThetaLayout& layout);

// Prior-mean initialization (sigma_j = log(xi1/xi2)).
ThetaState initial_theta(const ThetaLayout& layout, const HyperParams& hyper);

// Full run: burn-in with on-line adaptation (frozen at its end, burn-in draws
// discarded), then n_iter fixed-scale iterations.
ChainOutput run_chain(const PitPanel& panel, const NeighborhoodSystem& nbhd,
                      const HyperParams& hyper, const ThetaLayout& layout,
                      const SamplerConfig& config);

// Plain random-walk MH on the unnormalized posterior. Exact for topologies
// with Z_t = 1; used as the tractable-case reference sampler.
ChainOutput run_plain_mh(const PitPanel& panel, const NeighborhoodSystem& nbhd,
                         const HyperParams& hyper, const ThetaLayout& layout,
                         const SamplerConfig& config);

// Empirical quantile (linear interpolation between order statistics).
double empirical_quantile(std::vector<double> sorted_or_not, double q);

}  // namespace betamrf
