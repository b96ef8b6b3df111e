#pragma once

// Small self-contained special-function kit used across the library.

namespace betamrf {

// Standard normal pdf/cdf and inverse cdf (Acklam rational approximation
// polished with one Halley step; absolute error well below 1e-12).
double norm_pdf(double x);
double norm_cdf(double x);
double norm_cdf_inv(double u);

// Regularized incomplete beta function I_x(a, b) via the Lentz continued
// fraction. Requires a, b > 0 and x in [0, 1].
double reg_inc_beta(double a, double b, double x);

// log Gamma(a) - log Gamma(b) style normalizer of a Beta(a, b) density:
// log( Gamma(a+b) / (Gamma(a) Gamma(b)) ).
double log_beta_normalizer(double a, double b);

// logit(y) = log(y / (1 - y)), y in (0, 1).
double logit(double y);

}  // namespace betamrf
