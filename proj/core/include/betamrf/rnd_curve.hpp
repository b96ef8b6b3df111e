#pragma once

#include <vector>

namespace betamrf {

// Risk-neutral density/CDF pair over price space: either the analytic
// lognormal (GBM world) or a numeric grid curve extracted from a smile.
class RndCurve {
 public:
  static RndCurve analytic_lognormal(double s_t, double r, double sigma, double tau);
  // strikes ascending; pdf >= 0; cdf monotone, consistent with pdf by
  // trapezoid integration within 1e-6 (checked at construction).
  static RndCurve numeric(std::vector<double> strikes, std::vector<double> pdf,
                          std::vector<double> cdf);

  double pdf(double x) const;
  double cdf(double x) const;
  double inverse_cdf(double u) const;

  bool is_analytic() const { return analytic_; }
  const std::vector<double>& strikes() const { return strikes_; }
  const std::vector<double>& pdf_values() const { return pdf_; }
  const std::vector<double>& cdf_values() const { return cdf_; }

  // Analytic parameters (valid when is_analytic()).
  double s_t() const { return s_t_; }
  double rate() const { return r_; }
  double sigma() const { return sigma_; }
  double tau() const { return tau_; }

 private:
  RndCurve() = default;
  bool analytic_ = false;
  double s_t_ = 0.0, r_ = 0.0, sigma_ = 0.0, tau_ = 0.0;
  std::vector<double> strikes_, pdf_, cdf_;
};

}  // namespace betamrf
