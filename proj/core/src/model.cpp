#include "betamrf/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "betamrf/special.hpp"

namespace betamrf {

namespace {
constexpr double kMuClamp = 1e-8;
constexpr double kLinkClamp = 35.0;
}  // namespace

double logistic_link(double x) {
  x = std::clamp(x, -kLinkClamp, kLinkClamp);
  return 1.0 / (1.0 + std::exp(-x));
}

double mu_from_inputs(const ThetaState& theta, int j, const std::vector<double>& own_lags,
                      const std::vector<std::pair<int, double>>& neighbor_pits) {
  const int p = theta.layout.p();
  if (static_cast<int>(own_lags.size()) != p)
    throw std::invalid_argument("mu_from_inputs: lag count does not match p");
  double x = theta.alpha(j, 0);
  for (int k = 1; k <= p; ++k) x += theta.alpha(j, k) * own_lags[k - 1];
  for (const auto& [site, y] : neighbor_pits) x += theta.beta(j, site) * y;
  return std::clamp(logistic_link(x), kMuClamp, 1.0 - kMuClamp);
}

double compute_mu(const ThetaState& theta, const PitPanel& panel, const NeighborhoodSystem& nbhd,
                  int j, int t) {
  const int p = theta.layout.p();
  if (t < p || t >= panel.rows()) throw std::out_of_range("compute_mu: time index needs p lags");
  if (theta.layout.sites() != nbhd.sites() || nbhd.sites() != panel.cols())
    throw std::invalid_argument("compute_mu: dimension mismatch");
  double x = theta.alpha(j, 0);
  for (int k = 1; k <= p; ++k) x += theta.alpha(j, k) * panel.at(t - k, j);
  for (int k : nbhd.neighbors(j)) x += theta.beta(j, k) * panel.at(t, k);
  return std::clamp(logistic_link(x), kMuClamp, 1.0 - kMuClamp);
}

double log_beta_local(double y, const BetaLocalParams& params) {
  if (!(y > 0.0 && y < 1.0)) throw std::domain_error("log_beta_local: y must be in (0,1)");
  params.validate();
  const double a = params.shape1();
  const double b = params.shape2();
  return log_beta_normalizer(a, b) + (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y);
}

double pseudo_log_likelihood(const ThetaState& theta, const PitPanel& panel,
                             const NeighborhoodSystem& nbhd) {
  const int p = theta.layout.p();
  const int T = panel.rows();
  const int M = panel.cols();
  if (theta.layout.sites() != nbhd.sites() || nbhd.sites() != M)
    throw std::invalid_argument("pseudo_log_likelihood: dimension mismatch");
  if (T <= p) throw std::invalid_argument("pseudo_log_likelihood: panel needs more than p rows");
  double ll = 0.0;
  for (int t = p; t < T; ++t) {
    for (int j = 0; j < M; ++j) {
      BetaLocalParams local{compute_mu(theta, panel, nbhd, j, t), theta.gamma(j)};
      ll += log_beta_local(panel.at(t, j), local);
    }
  }
  return ll;
}

namespace {

double log_normal_kernel(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
}

}  // namespace

double log_prior(const ThetaState& theta, const HyperParams& hyper) {
  hyper.validate();
  const ThetaLayout& l = theta.layout;
  const int p = l.p();
  double lp = log_normal_kernel(theta.alpha_bar(), hyper.a, hyper.s0_sq) +
              log_normal_kernel(theta.beta_bar(), hyper.b, hyper.g0_sq);
  const double gamma_const = hyper.xi1 * std::log(hyper.xi2) - std::lgamma(hyper.xi1);
  const int groups = l.pooled() ? 1 : l.sites();
  for (int j = 0; j < groups; ++j) {
    lp += log_normal_kernel(theta.mean_alpha(j), theta.alpha_bar(), hyper.s_sq);
    lp += log_normal_kernel(theta.mean_beta(j), theta.beta_bar(), hyper.g_sq);
    for (int k = 0; k <= p; ++k)
      lp += log_normal_kernel(theta.alpha(j, k), theta.mean_alpha(j), hyper.s_j_sq);
    // gamma_j ~ Ga(xi1, xi2) on the original scale, with the sigma = log gamma
    // change-of-variables Jacobian folded in: xi1*sigma - xi2*exp(sigma).
    lp += gamma_const + hyper.xi1 * theta.sigma(j) - hyper.xi2 * std::exp(theta.sigma(j));
  }
  if (l.pooled()) {
    const int base = p + 1;
    for (int r = 0; r < l.pooled_roles(); ++r)
      lp += log_normal_kernel(theta.v[base + r], theta.mean_beta(0), hyper.g_j_sq);
  } else {
    for (int j = 0; j < l.sites(); ++j)
      for (int k : l.site_neighbors(j))
        lp += log_normal_kernel(theta.beta(j, k), theta.mean_beta(j), hyper.g_j_sq);
  }
  return lp;
}

double unnormalized_log_posterior(const ThetaState& theta, const PitPanel& panel,
                                  const NeighborhoodSystem& nbhd, const HyperParams& hyper) {
  return pseudo_log_likelihood(theta, panel, nbhd) + log_prior(theta, hyper);
}

PitPanel simulate_mrf_panel(const ThetaState& theta, const NeighborhoodSystem& nbhd, int rows,
                            Rng& rng) {
  if (nbhd.kind() == NeighborhoodSystem::Kind::Proximity)
    throw std::invalid_argument("simulate_mrf_panel: no sequential factorization under Proximity");
  const int p = theta.layout.p();
  const int M = nbhd.sites();
  if (rows <= p) throw std::invalid_argument("simulate_mrf_panel: rows must exceed p");
  PitPanel panel({}, M, std::vector<double>(static_cast<std::size_t>(rows) * M, 0.5));
  for (int t = 0; t < p; ++t)
    for (int j = 0; j < M; ++j) panel.set(t, j, rng.uniform());
  for (int t = p; t < rows; ++t) {
    for (int j = 0; j < M; ++j) {  // ascending j: Markov neighbors are already drawn
      double mu = compute_mu(theta, panel, nbhd, j, t);
      double g = theta.gamma(j);
      panel.set(t, j, rng.beta(mu * g, (1.0 - mu) * g));
    }
  }
  return panel;
}

}  // namespace betamrf
