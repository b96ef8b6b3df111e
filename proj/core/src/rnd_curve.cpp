#include "betamrf/rnd_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "betamrf/market_sim.hpp"
#include "betamrf/special.hpp"

namespace betamrf {

RndCurve RndCurve::analytic_lognormal(double s_t, double r, double sigma, double tau) {
  if (!(s_t > 0.0 && sigma > 0.0 && tau > 0.0))
    throw std::invalid_argument("RndCurve: analytic lognormal needs positive s_t, sigma, tau");
  RndCurve c;
  c.analytic_ = true;
  c.s_t_ = s_t;
  c.r_ = r;
  c.sigma_ = sigma;
  c.tau_ = tau;
  return c;
}

RndCurve RndCurve::numeric(std::vector<double> strikes, std::vector<double> pdf,
                           std::vector<double> cdf) {
  if (strikes.size() < 2 || strikes.size() != pdf.size() || strikes.size() != cdf.size())
    throw std::invalid_argument("RndCurve: numeric arrays must have equal size >= 2");
  double acc = cdf.front();
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    if (i > 0 && !(strikes[i] > strikes[i - 1]))
      throw std::invalid_argument("RndCurve: strikes must be strictly increasing");
    if (pdf[i] < 0.0) throw std::invalid_argument("RndCurve: pdf must be nonnegative");
    if (i > 0) {
      if (cdf[i] < cdf[i - 1] - 1e-12)
        throw std::invalid_argument("RndCurve: cdf must be monotone");
      acc += 0.5 * (pdf[i] + pdf[i - 1]) * (strikes[i] - strikes[i - 1]);
      if (std::fabs(acc - cdf[i]) > 1e-6)
        throw std::invalid_argument("RndCurve: cdf inconsistent with trapezoid-integrated pdf");
    }
  }
  RndCurve c;
  c.strikes_ = std::move(strikes);
  c.pdf_ = std::move(pdf);
  c.cdf_ = std::move(cdf);
  return c;
}

double RndCurve::pdf(double x) const {
  if (analytic_) return lognormal_pdf(x, s_t_, r_, sigma_, tau_);
  if (x <= strikes_.front() || x >= strikes_.back()) {
    if (x == strikes_.front()) return pdf_.front();
    if (x == strikes_.back()) return pdf_.back();
    return 0.0;
  }
  auto it = std::upper_bound(strikes_.begin(), strikes_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - strikes_.begin());
  double w = (x - strikes_[i - 1]) / (strikes_[i] - strikes_[i - 1]);
  return (1.0 - w) * pdf_[i - 1] + w * pdf_[i];
}

double RndCurve::cdf(double x) const {
  if (analytic_) {
    if (x <= 0.0) return 0.0;
    return lognormal_cdf(x, s_t_, r_, sigma_, tau_);
  }
  if (x <= strikes_.front()) return cdf_.front();
  if (x >= strikes_.back()) return cdf_.back();
  auto it = std::upper_bound(strikes_.begin(), strikes_.end(), x);
  std::size_t i = static_cast<std::size_t>(it - strikes_.begin());
  double w = (x - strikes_[i - 1]) / (strikes_[i] - strikes_[i - 1]);
  return (1.0 - w) * cdf_[i - 1] + w * cdf_[i];
}

double RndCurve::inverse_cdf(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("RndCurve::inverse_cdf: u must be in (0,1)");
  if (analytic_)
    return s_t_ * std::exp((r_ - 0.5 * sigma_ * sigma_) * tau_ +
                           sigma_ * std::sqrt(tau_) * norm_cdf_inv(u));
  if (u <= cdf_.front()) return strikes_.front();
  if (u >= cdf_.back()) return strikes_.back();
  auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = static_cast<std::size_t>(it - cdf_.begin());
  if (i == 0) return strikes_.front();
  double denom = cdf_[i] - cdf_[i - 1];
  if (denom <= 0.0) return strikes_[i];
  double w = (u - cdf_[i - 1]) / denom;
  return (1.0 - w) * strikes_[i - 1] + w * strikes_[i];
}

}  // namespace betamrf
