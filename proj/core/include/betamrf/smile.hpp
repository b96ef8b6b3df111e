#pragma once

#include <map>
#include <string>
#include <vector>

#include "betamrf/rnd_curve.hpp"
#include "betamrf/types.hpp"

namespace betamrf {

struct SmilePoint {
  double delta;  // call delta in (0,1)
  double sigma;  // annualized implied vol
};

// One volatility smile: a (date, tenor) slice of the surface quoted in
// sigma-delta space.
struct SmileQuote {
  std::string date;
  double tenor = 0.0;  // year fraction
  double spot = 0.0;
  double forward = 0.0;
  double rate = 0.0;   // continuously compounded, per year
  std::vector<SmilePoint> points;

  void validate() const;
};

// Natural cubic smoothing spline in delta space. Evaluable on the quoted
// delta range with flat (constant-sigma) extrapolation outside it.
struct SplineFit {
  std::vector<double> knots;          // delta grid, ascending
  std::vector<double> values;         // fitted sigma at the knots
  std::vector<double> second_derivs;  // natural: zero at both ends
  std::vector<double> weights;        // normalized vega weights, knot order
  std::vector<double> observed;       // observed sigma at the knots
  double lambda = 0.99;

  double value(double delta) const;
  double derivative(double delta) const;
  double second_derivative(double delta) const;
  double roughness() const;  // integral of the squared second derivative
  // Weighted fit term + roughness penalty at an arbitrary lambda, for
  // objective comparisons between candidate fits.
  double objective(double lambda_eval) const;
};

// Discounted Black formula on the forward.
double bs_call_price(double forward, double strike, double sigma, double tau, double rate);
// Call delta Phi(d1) (= dC/dS with F = S e^{r tau}).
double bs_delta(double forward, double strike, double sigma, double tau);
double bs_vega(double forward, double strike, double sigma, double tau, double rate);
// Strike with the given call delta at volatility sigma.
double bs_strike_from_delta(double forward, double delta, double sigma, double tau);
// Implied volatility by bisection.
double bs_implied_vol(double forward, double strike, double price, double tau, double rate);

// Vega-weighted natural cubic smoothing spline for the smile, minimizing
// lambda * sum w_i (sigma_i - g(delta_i))^2 + (1 - lambda) * int (g'')^2.
SplineFit fit_smile_spline(const SmileQuote& quote, double lambda = 0.99);

// Breeden-Litzenberger extraction: price a call ladder off the fitted smile
// and take e^{r tau} times the second strike derivative (central finite
// differences on a uniform grid spanning the [1e-4, 1-1e-4] quantiles of a
// flat-vol lognormal anchor). Negative densities are clipped; more than 5%
// clipped mass is a fit failure. The result is renormalized to unit mass.
RndCurve extract_rnd(const SplineFit& fit, const SmileQuote& quote, int strike_grid_size = 500);

// Assemble a PIT panel from per-(date, tenor) smiles and realized underlying
// levels keyed as realized[date][tenor]. Dates missing any tenor's quote or
// realized level are dropped with a warning on stderr.
PitPanel pits_from_surface(const std::vector<SmileQuote>& quotes,
                           const std::map<std::string, std::map<double, double>>& realized);

}  // namespace betamrf
