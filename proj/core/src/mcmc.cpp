#include "betamrf/mcmc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <limits>
#include <stdexcept>

#include "betamrf/special.hpp"

namespace betamrf {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double finite_or_neg_inf(double x) { return std::isfinite(x) ? x : kNegInf; }

double log_beta_norm_mu(double mu, double gamma) {
  return log_beta_normalizer(mu * gamma, (1.0 - mu) * gamma);
}
}  // namespace

void SamplerConfig::validate() const {
  if (n_iter < 0) throw std::invalid_argument("SamplerConfig: n_iter must be >= 0");
  if (n_burnin < 0) throw std::invalid_argument("SamplerConfig: n_burnin must be >= 0");
  if (inner_sweeps < 1) throw std::invalid_argument("SamplerConfig: inner_sweeps must be >= 1");
  if (inner_sweeps > 50) throw std::invalid_argument("SamplerConfig: inner_sweeps must be <= 50");
  if (adapt_window < 1) throw std::invalid_argument("SamplerConfig: adapt_window must be >= 1");
  for (double s : proposal_scale)
    if (!(s > 0.0)) throw std::invalid_argument("SamplerConfig: proposal_scale entries must be > 0");
}

std::vector<double> ChainOutput::column(int k) const {
  std::vector<double> c(n_iter);
  for (int i = 0; i < n_iter; ++i) c[i] = at(i, k);
  return c;
}

ThetaState ChainOutput::posterior_mean_theta() const {
  ThetaState theta(layout);
  for (int k = 0; k < dim; ++k) {
    double s = 0.0;
    for (int i = 0; i < n_iter; ++i) s += at(i, k);
    theta.v[k] = s / n_iter;
  }
  return theta;
}

ThetaState outer_propose(const ThetaState& theta, const std::vector<double>& scale, Rng& rng) {
  if (scale.size() != theta.v.size())
    throw std::invalid_argument("outer_propose: scale dimension mismatch");
  ThetaState star = theta;
  for (std::size_t i = 0; i < scale.size(); ++i) star.v[i] += std::sqrt(scale[i]) * rng.normal();
  return star;
}

void gibbs_sweep_auxiliary(AuxiliaryField& field, const ThetaState& theta,
                           const NeighborhoodSystem& nbhd, Rng& rng,
                           std::vector<long>* accept_counts, std::vector<long>* attempt_counts) {
  const int p = theta.layout.p();
  const int T = field.rows();
  const int M = field.cols();
  if (nbhd.sites() != M || theta.layout.sites() != M)
    throw std::invalid_argument("gibbs_sweep_auxiliary: dimension mismatch");
  std::vector<double> mu_cur, mu_star;
  std::vector<std::pair<int, int>> affected;
  for (int t = p; t < T; ++t) {
    for (int j = 0; j < M; ++j) {
      const double mu_j = compute_mu(theta, field, nbhd, j, t);
      const double g_j = theta.gamma(j);
      const double y_star = rng.beta(mu_j * g_j, (1.0 - mu_j) * g_j);

      // Every local density whose mean depends on y_{t,j}: same-time sites
      // with j in their neighborhood, plus site j itself at the following p
      // times, where y_{t,j} enters as an autoregressive lag.
      affected.clear();
      for (int i : nbhd.dependents(j)) affected.emplace_back(i, t);
      for (int k = 1; k <= p && t + k < T; ++k) affected.emplace_back(j, t + k);

      const double y_old = field.at(t, j);
      double log_rho = 0.0;
      if (!affected.empty()) {
        mu_cur.clear();
        mu_star.clear();
        for (auto [i, s] : affected) mu_cur.push_back(compute_mu(theta, field, nbhd, i, s));
        field.set(t, j, y_star);
        for (auto [i, s] : affected) mu_star.push_back(compute_mu(theta, field, nbhd, i, s));
        for (std::size_t d = 0; d < affected.size(); ++d) {
          const auto [i, s] = affected[d];
          const double g_i = theta.gamma(i);
          const double a_is = logit(field.at(s, i));
          log_rho += log_beta_norm_mu(mu_star[d], g_i) - log_beta_norm_mu(mu_cur[d], g_i) +
                     a_is * (mu_star[d] - mu_cur[d]) * g_i;
        }
      } else {
        field.set(t, j, y_star);  // nothing else depends on this value
      }

      bool accept = log_rho >= 0.0 || std::log(rng.uniform()) < log_rho;
      if (!accept) field.set(t, j, y_old);
      if (attempt_counts) {
        (*attempt_counts)[j] += 1;
        if (accept) (*accept_counts)[j] += 1;
      }
    }
  }
}

double exchange_accept(const ThetaState& theta, const ThetaState& theta_star, const PitPanel& panel,
                       const AuxiliaryField& aux, const NeighborhoodSystem& nbhd) {
  if (aux.rows() != panel.rows() || aux.cols() != panel.cols())
    throw std::invalid_argument("exchange_accept: auxiliary field shape mismatch");
  const double log_rho = pseudo_log_likelihood(theta, aux, nbhd) -
                         pseudo_log_likelihood(theta, panel, nbhd) +
                         pseudo_log_likelihood(theta_star, panel, nbhd) -
                         pseudo_log_likelihood(theta_star, aux, nbhd);
  return std::min(0.0, log_rho);
}

namespace {

double step1_log_target(const ThetaState& theta, const PitPanel& panel,
                        const NeighborhoodSystem& nbhd, const HyperParams& hyper,
                        SamplerConfig::Step1Target target) {
  if (target == SamplerConfig::Step1Target::Prior)
    return finite_or_neg_inf(log_prior(theta, hyper));
  return finite_or_neg_inf(unnormalized_log_posterior(theta, panel, nbhd, hyper));
}

}  // namespace

StepFlags double_mh_step(ThetaState& theta, double& cur_log_target, const PitPanel& panel,
                         const NeighborhoodSystem& nbhd, const HyperParams& hyper,
                         const SamplerConfig& config, const std::vector<double>& scale, Rng& rng,
                         std::vector<long>* inner_accepts, std::vector<long>* inner_attempts) {
  StepFlags flags;
  ThetaState theta_star = outer_propose(theta, scale, rng);
  const double star_target = step1_log_target(theta_star, panel, nbhd, hyper, config.step1_target);
  const double log_a1 = star_target - cur_log_target;
  if (!(log_a1 >= 0.0 || std::log(rng.uniform()) < log_a1)) return flags;
  flags.outer_accepted = true;

  // Auxiliary field under theta', started at the observed panel.
  AuxiliaryField aux = panel;
  for (int s = 0; s < config.inner_sweeps; ++s)
    gibbs_sweep_auxiliary(aux, theta_star, nbhd, rng, inner_accepts, inner_attempts);

  flags.exchange_attempted = true;
  double log_a2;
  if (config.step1_target == SamplerConfig::Step1Target::Posterior) {
    // The likelihood ratio at the data already entered step 1; only the
    // normalizing-constant correction remains.
    log_a2 = finite_or_neg_inf(pseudo_log_likelihood(theta, aux, nbhd) -
                               pseudo_log_likelihood(theta_star, aux, nbhd));
  } else {
    log_a2 = exchange_accept(theta, theta_star, panel, aux, nbhd);
  }
  if (log_a2 >= 0.0 || std::log(rng.uniform()) < log_a2) {
    flags.exchange_accepted = true;
    theta = std::move(theta_star);
    cur_log_target = star_target;
  }
  return flags;
}

std::vector<double> adapt_scale(const std::vector<int>& window_accepts, int window_index,
                                std::vector<double> scale, double target_rate) {
  if (window_accepts.empty() || window_index < 1) return scale;
  double rate = 0.0;
  for (int a : window_accepts) rate += a;
  rate /= static_cast<double>(window_accepts.size());
  // Gain large enough to travel the two orders of magnitude between the
  // fixed initial scale and the equilibrium scale within a 2,000-iteration
  // burn-in (20 windows of 100).
  const double c = 2.0 / std::sqrt(static_cast<double>(window_index));
  const double factor = std::exp(c * (rate - target_rate));
  for (double& s : scale) s *= factor;
  return scale;
}

namespace {

// Lag-window spectral density at frequency zero, Bartlett weights,
// truncation at 4% of the segment length.
double spectral_density_zero(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  const int L = std::max(1, static_cast<int>(0.04 * n));
  std::vector<double> c(L + 1, 0.0);
  for (int k = 0; k <= L; ++k) {
    for (int i = 0; i + k < n; ++i) c[k] += (x[i] - mean) * (x[i + k] - mean);
    c[k] /= n;
  }
  if (c[0] <= 0.0) throw std::domain_error("geweke_z: zero-variance segment");
  double s = c[0];
  for (int k = 1; k <= L; ++k) s += 2.0 * (1.0 - static_cast<double>(k) / (L + 1)) * c[k];
  return s > 0.0 ? s : c[0];
}

}  // namespace

double geweke_z(std::span<const double> column, double first_fraction, double last_fraction) {
  const int n = static_cast<int>(column.size());
  if (n < 100) throw std::invalid_argument("geweke_z: need at least 100 draws");
  const int n1 = static_cast<int>(first_fraction * n);
  const int n2 = static_cast<int>(last_fraction * n);
  if (n1 < 2 || n2 < 2) throw std::invalid_argument("geweke_z: degenerate segment lengths");
  auto first = column.subspan(0, n1);
  auto last = column.subspan(n - n2, n2);
  double m1 = 0.0, m2 = 0.0;
  for (double v : first) m1 += v;
  for (double v : last) m2 += v;
  m1 /= n1;
  m2 /= n2;
  const double s1 = spectral_density_zero(first);
  const double s2 = spectral_density_zero(last);
  return (m1 - m2) / std::sqrt(s1 / n1 + s2 / n2);
}

double empirical_quantile(std::vector<double> x, double q) {
  if (x.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  std::sort(x.begin(), x.end());
  if (q <= 0.0) return x.front();
  if (q >= 1.0) return x.back();
  const double h = q * (x.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  const double w = h - lo;
  if (lo + 1 >= x.size()) return x.back();
  return (1.0 - w) * x[lo] + w * x[lo + 1];
}

std::vector<ParamSummary> summarize(const ChainOutput& chain, double prob) {
  if (chain.n_iter <= 0) throw std::invalid_argument("summarize: empty chain");
  const double tail = (1.0 - prob) / 2.0;
  std::vector<ParamSummary> out;
  out.reserve(chain.dim);
  for (int k = 0; k < chain.dim; ++k) {
    std::vector<double> col = chain.column(k);
    std::string name = chain.names[k];
    if (chain.layout.is_sigma_coord(k)) {
      for (double& v : col) v = std::exp(v);  // report gamma on the original scale
      name = "gamma" + name.substr(5);
    }
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= col.size();
    out.push_back({name, mean, empirical_quantile(col, tail), empirical_quantile(col, 1.0 - tail)});
  }
  return out;
}

std::vector<double> default_proposal_scale(const ThetaLayout& layout) {
  std::vector<double> scale(layout.dim(), 0.01);
  for (int i = 0; i < layout.dim(); ++i)
    if (layout.is_sigma_coord(i)) scale[i] = 0.04;
  return scale;
}

ThetaState initial_theta(const ThetaLayout& layout, const HyperParams& hyper) {
  ThetaState theta(layout);
  const double sigma0 = std::log(hyper.xi1 / hyper.xi2);
  theta.v[layout.alpha_bar_index()] = hyper.a;
  theta.v[layout.beta_bar_index()] = hyper.b;
  const int groups = layout.pooled() ? 1 : layout.sites();
  for (int j = 0; j < groups; ++j) {
    theta.v[layout.mean_alpha_index(j)] = hyper.a;
    theta.v[layout.mean_beta_index(j)] = hyper.b;
    for (int k = 0; k <= layout.p(); ++k) theta.v[layout.alpha_index(j, k)] = hyper.a;
    theta.v[layout.sigma_index(j)] = sigma0;
  }
  if (!layout.pooled())
    for (int j = 0; j < layout.sites(); ++j)
      for (int k : layout.site_neighbors(j)) theta.v[layout.beta_index(j, k)] = hyper.b;
  return theta;
}

namespace {

// Conjugate Gibbs refresh of the hierarchical mean coordinates. These enter
// the target only through Gaussian prior layers (never the pseudo-likelihood
// or the intractable normalizer), so their full conditionals are exact
// Gaussians. The joint random walk alone mixes them far too slowly: they are
// weakly identified, and their posterior scale dwarfs the step size that the
// data-informed coordinates can tolerate.
void gibbs_update_means(ThetaState& theta, const HyperParams& hyper, Rng& rng) {
  const ThetaLayout& l = theta.layout;
  const int p = l.p();
  const int groups = l.pooled() ? 1 : l.sites();

  for (int j = 0; j < groups; ++j) {
    // mean_alpha_j | alpha_j., alpha_bar
    const double prec_a = 1.0 / hyper.s_sq + (p + 1) / hyper.s_j_sq;
    double m_a = theta.alpha_bar() / hyper.s_sq;
    for (int k = 0; k <= p; ++k) m_a += theta.alpha(j, k) / hyper.s_j_sq;
    theta.v[l.mean_alpha_index(j)] = m_a / prec_a + rng.normal() / std::sqrt(prec_a);

    // mean_beta_j | beta_j., beta_bar (prior-only when the site has no
    // neighbors)
    double prec_b = 1.0 / hyper.g_sq;
    double m_b = theta.beta_bar() / hyper.g_sq;
    if (l.pooled()) {
      const int base = p + 1;
      for (int r = 0; r < l.pooled_roles(); ++r) {
        m_b += theta.v[base + r] / hyper.g_j_sq;
        prec_b += 1.0 / hyper.g_j_sq;
      }
    } else {
      for (int k : l.site_neighbors(j)) {
        m_b += theta.beta(j, k) / hyper.g_j_sq;
        prec_b += 1.0 / hyper.g_j_sq;
      }
    }
    theta.v[l.mean_beta_index(j)] = m_b / prec_b + rng.normal() / std::sqrt(prec_b);
  }

  // alpha_bar | mean_alpha_.  and  beta_bar | mean_beta_.
  const double prec_ab = 1.0 / hyper.s0_sq + groups / hyper.s_sq;
  double m_ab = hyper.a / hyper.s0_sq;
  for (int j = 0; j < groups; ++j) m_ab += theta.mean_alpha(j) / hyper.s_sq;
  theta.v[l.alpha_bar_index()] = m_ab / prec_ab + rng.normal() / std::sqrt(prec_ab);

  const double prec_bb = 1.0 / hyper.g0_sq + groups / hyper.g_sq;
  double m_bb = hyper.b / hyper.g0_sq;
  for (int j = 0; j < groups; ++j) m_bb += theta.mean_beta(j) / hyper.g_sq;
  theta.v[l.beta_bar_index()] = m_bb / prec_bb + rng.normal() / std::sqrt(prec_bb);
}

struct RateWindow {
  std::vector<int> outer;
  std::vector<int> exchange;

  void push(const StepFlags& f) {
    outer.push_back(f.outer_accepted ? 1 : 0);
    if (f.exchange_attempted) exchange.push_back(f.exchange_accepted ? 1 : 0);
  }
  void clear() {
    outer.clear();
    exchange.clear();
  }
  // Accept indicators pooling both MH steps; one scale knob moves both rates,
  // so adaptation drives their weighted average to the target. The exchange
  // step is double-weighted because its rate sits below the outer step's at
  // any common scale and is the one that tends to fall out of band.
  std::vector<int> binding() const {
    if (exchange.empty()) return outer;
    std::vector<int> pooled = outer;
    pooled.insert(pooled.end(), exchange.begin(), exchange.end());
    pooled.insert(pooled.end(), exchange.begin(), exchange.end());
    return pooled;
  }
};

template <typename StepFn>
ChainOutput run_generic(const PitPanel& panel, const NeighborhoodSystem& nbhd,
                        const HyperParams& hyper, const ThetaLayout& layout,
                        const SamplerConfig& config, StepFn step, bool has_exchange) {
  config.validate();
  hyper.validate();
  std::vector<double> scale =
      config.proposal_scale.empty() ? default_proposal_scale(layout) : config.proposal_scale;
  if (static_cast<int>(scale.size()) != layout.dim())
    throw std::invalid_argument("run_chain: proposal_scale dimension mismatch");

  const auto t0 = std::chrono::steady_clock::now();
  ThetaState theta = initial_theta(layout, hyper);
  std::vector<long> inner_acc(layout.sites(), 0), inner_att(layout.sites(), 0);
  double cur = step.init_target(theta, panel, nbhd, hyper);

  // Dedicated stream for the conjugate mean updates; the cached target is
  // adjusted by the prior delta (the pseudo-likelihood does not involve the
  // mean coordinates).
  Rng mean_rng(config.seed + 0x9e3779b97f4a7c15ULL);
  auto refresh_means = [&]() {
    const double before = log_prior(theta, hyper);
    gibbs_update_means(theta, hyper, mean_rng);
    cur += log_prior(theta, hyper) - before;
  };

  RateWindow window;
  int window_index = 0;
  // The hierarchical mean coordinates are refreshed by conjugate Gibbs steps,
  // so the random walk never proposes them: zero scale there keeps the outer
  // acceptance rate (and its adaptation) a statement about the data-informed
  // coordinates only.
  std::vector<bool> is_mean(layout.dim(), false);
  {
    const int groups = layout.pooled() ? 1 : layout.sites();
    for (int j = 0; j < groups; ++j) {
      is_mean[layout.mean_alpha_index(j)] = true;
      is_mean[layout.mean_beta_index(j)] = true;
    }
    is_mean[layout.alpha_bar_index()] = true;
    is_mean[layout.beta_bar_index()] = true;
    for (int k = 0; k < layout.dim(); ++k)
      if (is_mean[k]) scale[k] = 0.0;
  }

  // The proposal covariance diagonal is split into a global scalar, driven by
  // the binding acceptance rate, and a per-coordinate shape that tracks the
  // chain's realized variance, so coordinates with very different posterior
  // scales stay balanced.
  std::vector<double> shape = scale;
  double global_factor = 1.0;
  std::vector<double> win_sum(layout.dim(), 0.0), win_sumsq(layout.dim(), 0.0);
  int win_n = 0;
  for (int i = 0; i < config.n_burnin; ++i) {
    StepFlags f = step(theta, cur, scale, &inner_acc, &inner_att);
    refresh_means();
    window.push(f);
    for (int k = 0; k < layout.dim(); ++k) {
      win_sum[k] += theta.v[k];
      win_sumsq[k] += theta.v[k] * theta.v[k];
    }
    ++win_n;
    if (config.adapt && static_cast<int>(window.outer.size()) >= config.adapt_window) {
      // Two-phase schedule: during the first half of burn-in the gain stays
      // constant and the shape keeps updating, so adaptation can travel far
      // from a poor initial scale; in the second half the shape is frozen and
      // the gain decays, so the rates settle.
      ++window_index;
      const int n_windows = config.n_burnin / config.adapt_window;
      const int half = std::max(n_windows / 2, 1);
      const bool explore = window_index <= half;
      const int decay = window_index - half;
      const int schedule_index = explore ? 4 : 4 + decay * decay;
      std::vector<double> unit(layout.dim(), global_factor);
      unit = adapt_scale(window.binding(), schedule_index, std::move(unit), config.target_rate);
      global_factor = unit[0];
      for (int k = 0; k < layout.dim(); ++k) {
        if (is_mean[k]) continue;  // Gibbs-updated; never proposed
        if (explore) {
          const double mean = win_sum[k] / win_n;
          const double var = std::max(win_sumsq[k] / win_n - mean * mean, 0.0);
          if (var > 1e-12) shape[k] = 0.5 * shape[k] + 0.5 * var;
        }
        scale[k] = global_factor * shape[k];
      }
      std::fill(win_sum.begin(), win_sum.end(), 0.0);
      std::fill(win_sumsq.begin(), win_sumsq.end(), 0.0);
      win_n = 0;
      window.clear();
    }
  }

  // Adaptation frozen; burn-in draws and inner statistics are discarded.
  std::fill(inner_acc.begin(), inner_acc.end(), 0);
  std::fill(inner_att.begin(), inner_att.end(), 0);

  ChainOutput out;
  out.layout = layout;
  out.names = layout.names();
  out.dim = layout.dim();
  out.n_iter = config.n_iter;
  out.draws.resize(static_cast<std::size_t>(config.n_iter) * layout.dim());
  long outer_acc = 0, exch_acc = 0, exch_att = 0;
  for (int i = 0; i < config.n_iter; ++i) {
    StepFlags f = step(theta, cur, scale, &inner_acc, &inner_att);
    refresh_means();
    outer_acc += f.outer_accepted;
    exch_att += f.exchange_attempted;
    exch_acc += f.exchange_accepted;
    std::copy(theta.v.begin(), theta.v.end(), out.draws.begin() + static_cast<std::size_t>(i) * out.dim);
  }
  out.accept_rate_outer = config.n_iter > 0 ? static_cast<double>(outer_acc) / config.n_iter : 0.0;
  out.accept_rate_exchange = exch_att > 0 ? static_cast<double>(exch_acc) / exch_att : 0.0;
  if (has_exchange) {
    out.accept_rate_inner.resize(layout.sites(), 0.0);
    for (int j = 0; j < layout.sites(); ++j)
      if (inner_att[j] > 0)
        out.accept_rate_inner[j] = static_cast<double>(inner_acc[j]) / inner_att[j];
  }
  out.geweke_z.resize(out.dim, std::numeric_limits<double>::quiet_NaN());
  if (config.n_iter >= 100) {
    for (int k = 0; k < out.dim; ++k) {
      std::vector<double> col = out.column(k);
      try {
        out.geweke_z[k] = geweke_z(col);
      } catch (const std::domain_error&) {
        // degenerate column; left NaN
      }
    }
  }
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

struct DoubleMhStepper {
  const PitPanel& panel;
  const NeighborhoodSystem& nbhd;
  const HyperParams& hyper;
  const SamplerConfig& config;
  Rng rng;

  double init_target(const ThetaState& theta, const PitPanel& p, const NeighborhoodSystem& n,
                     const HyperParams& h) {
    if (config.step1_target == SamplerConfig::Step1Target::Prior)
      return log_prior(theta, h);
    return unnormalized_log_posterior(theta, p, n, h);
  }

  StepFlags operator()(ThetaState& theta, double& cur, const std::vector<double>& scale,
                       std::vector<long>* ia, std::vector<long>* it) {
    return double_mh_step(theta, cur, panel, nbhd, hyper, config, scale, rng, ia, it);
  }
};

struct PlainMhStepper {
  const PitPanel& panel;
  const NeighborhoodSystem& nbhd;
  const HyperParams& hyper;
  Rng rng;

  double init_target(const ThetaState& theta, const PitPanel& p, const NeighborhoodSystem& n,
                     const HyperParams& h) {
    return unnormalized_log_posterior(theta, p, n, h);
  }

  StepFlags operator()(ThetaState& theta, double& cur, const std::vector<double>& scale,
                       std::vector<long>*, std::vector<long>*) {
    StepFlags flags;
    ThetaState star = outer_propose(theta, scale, rng);
    double star_target = finite_or_neg_inf(unnormalized_log_posterior(star, panel, nbhd, hyper));
    double log_a = star_target - cur;
    if (log_a >= 0.0 || std::log(rng.uniform()) < log_a) {
      theta = std::move(star);
      cur = star_target;
      flags.outer_accepted = true;
    }
    return flags;
  }
};

}  // namespace

ChainOutput run_chain(const PitPanel& panel, const NeighborhoodSystem& nbhd,
                      const HyperParams& hyper, const ThetaLayout& layout,
                      const SamplerConfig& config) {
  DoubleMhStepper stepper{panel, nbhd, hyper, config, Rng(config.seed)};
  return run_generic(panel, nbhd, hyper, layout, config, stepper, true);
}

ChainOutput run_plain_mh(const PitPanel& panel, const NeighborhoodSystem& nbhd,
                         const HyperParams& hyper, const ThetaLayout& layout,
                         const SamplerConfig& config) {
  PlainMhStepper stepper{panel, nbhd, hyper, Rng(config.seed)};
  return run_generic(panel, nbhd, hyper, layout, config, stepper, false);
}

}  // namespace betamrf
