#include "betamrf/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "betamrf/model.hpp"
#include "betamrf/special.hpp"

namespace betamrf {

namespace {

ThetaState theta_from_draw(const ChainOutput& draws, int it) {
  ThetaState theta(draws.layout);
  for (int k = 0; k < draws.dim; ++k) theta.v[k] = draws.at(it, k);
  return theta;
}

double equal_tail_quantile(std::vector<double>& sorted_scratch, double prob) {
  // Type-7 quantile on an already-sorted scratch vector.
  const std::size_t n = sorted_scratch.size();
  const double h = prob * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted_scratch[lo] * (1.0 - frac) + sorted_scratch[hi] * frac;
}

}  // namespace

double beta_pdf(double u, const BetaLocalParams& params) {
  params.validate();
  if (u <= 0.0 || u >= 1.0) return 0.0;
  const double a = params.shape1();
  const double b = params.shape2();
  return std::exp(log_beta_normalizer(a, b) + (a - 1.0) * std::log(u) +
                  (b - 1.0) * std::log1p(-u));
}

double beta_cdf(double u, const BetaLocalParams& params) {
  params.validate();
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return reg_inc_beta(params.shape1(), params.shape2(), u);
}

CalibratedCurve calibrate_density(const RndCurve& rnd, const ChainOutput& draws, int j,
                                  const ConditioningInfo& cond, int grid_size) {
  if (draws.n_iter <= 0) throw std::invalid_argument("calibrate_density: no posterior draws");
  if (j < 0 || j >= draws.layout.sites()) {
    throw std::invalid_argument("calibrate_density: site index out of range");
  }
  if (static_cast<int>(cond.own_lags.size()) != draws.layout.p()) {
    throw std::invalid_argument("calibrate_density: need one own lag per autoregressive order");
  }

  std::vector<double> strikes;
  if (rnd.is_analytic()) {
    if (grid_size < 3) throw std::invalid_argument("calibrate_density: grid too small");
    const double lo = rnd.inverse_cdf(1e-4);
    const double hi = rnd.inverse_cdf(1.0 - 1e-4);
    strikes.resize(grid_size);
    for (int i = 0; i < grid_size; ++i) {
      strikes[i] = lo + (hi - lo) * static_cast<double>(i) / (grid_size - 1);
    }
  } else {
    strikes = rnd.strikes();
  }
  const int n = static_cast<int>(strikes.size());

  std::vector<double> q_cdf(n), q_pdf(n);
  for (int i = 0; i < n; ++i) {
    q_cdf[i] = rnd.cdf(strikes[i]);
    q_pdf[i] = rnd.pdf(strikes[i]);
  }

  CalibratedCurve out;
  out.strikes = strikes;
  out.pdf_mean.assign(n, 0.0);
  out.pdf_lo.assign(n, 0.0);
  out.pdf_hi.assign(n, 0.0);
  out.cdf_mean.assign(n, 0.0);

  // per_point[i] holds the per-draw calibrated pdf at strike i.
  std::vector<std::vector<double>> per_point(n, std::vector<double>(draws.n_iter));
  for (int it = 0; it < draws.n_iter; ++it) {
    const ThetaState theta = theta_from_draw(draws, it);
    const double mu = mu_from_inputs(theta, j, cond.own_lags, cond.neighbor_pits);
    const BetaLocalParams params{mu, theta.gamma(j)};
    for (int i = 0; i < n; ++i) {
      per_point[i][it] = beta_pdf(q_cdf[i], params) * q_pdf[i];
      out.cdf_mean[i] += beta_cdf(q_cdf[i], params);
    }
  }

  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (double v : per_point[i]) sum += v;
    out.pdf_mean[i] = sum / draws.n_iter;
    out.cdf_mean[i] /= draws.n_iter;
    std::sort(per_point[i].begin(), per_point[i].end());
    out.pdf_lo[i] = equal_tail_quantile(per_point[i], 0.025);
    out.pdf_hi[i] = equal_tail_quantile(per_point[i], 0.975);
  }
  return out;
}

std::vector<PitEcdf> calibrated_pit_cdf(const PitPanel& panel, const ChainOutput& draws,
                                        const NeighborhoodSystem& nbhd) {
  if (draws.n_iter <= 0) throw std::invalid_argument("calibrated_pit_cdf: no posterior draws");
  const ThetaState theta = draws.posterior_mean_theta();
  const int p = draws.layout.p();
  const int m = panel.cols();
  if (m != draws.layout.sites() || m != nbhd.sites()) {
    throw std::invalid_argument("calibrated_pit_cdf: site count mismatch");
  }

  std::vector<PitEcdf> out(m);
  for (int j = 0; j < m; ++j) {
    PitEcdf& e = out[j];
    for (int t = p; t < panel.rows(); ++t) {
      const double y = panel.at(t, j);
      const double mu = compute_mu(theta, panel, nbhd, j, t);
      e.uncal_sample.push_back(y);
      e.cal_sample.push_back(beta_cdf(y, BetaLocalParams{mu, theta.gamma(j)}));
    }
    std::vector<double> su = e.uncal_sample, sc = e.cal_sample;
    std::sort(su.begin(), su.end());
    std::sort(sc.begin(), sc.end());
    const double inv_n = 1.0 / static_cast<double>(su.size());
    e.u.resize(101);
    e.ecdf_uncal.resize(101);
    e.ecdf_cal.resize(101);
    for (int g = 0; g <= 100; ++g) {
      const double u = static_cast<double>(g) / 100.0;
      e.u[g] = u;
      e.ecdf_uncal[g] =
          static_cast<double>(std::upper_bound(su.begin(), su.end(), u) - su.begin()) * inv_n;
      e.ecdf_cal[g] =
          static_cast<double>(std::upper_bound(sc.begin(), sc.end(), u) - sc.begin()) * inv_n;
    }
  }
  return out;
}

double ks_distance(const std::vector<double>& sample) {
  if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::vector<double> s = sample;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = std::clamp(s[i], 0.0, 1.0);
    d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - x,
                             x - static_cast<double>(i) / n));
  }
  return d;
}

}  // namespace betamrf
