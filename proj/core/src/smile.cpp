#include "betamrf/smile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>

#include "betamrf/special.hpp"

namespace betamrf {

namespace {

// Dense Gaussian elimination with partial pivoting; A is n x n row-major.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(a[r * n + col]) > std::fabs(a[piv * n + col])) piv = r;
    }
    if (std::fabs(a[piv * n + col]) < 1e-14) {
      throw std::runtime_error("smile spline: singular linear system");
    }
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    const double d = a[col * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / d;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * x[c];
    x[r] = s / a[r * n + r];
  }
  return x;
}

int find_interval(const std::vector<double>& knots, double x) {
  // Largest i with knots[i] <= x, clamped to a valid interval index.
  const int n = static_cast<int>(knots.size());
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  int i = static_cast<int>(it - knots.begin()) - 1;
  return std::clamp(i, 0, n - 2);
}

}  // namespace

void SmileQuote::validate() const {
  if (points.size() < 4) throw std::invalid_argument("smile quote: need at least 4 points");
  if (!(tenor > 0.0)) throw std::invalid_argument("smile quote: tenor must be positive");
  if (!(spot > 0.0) || !(forward > 0.0)) {
    throw std::invalid_argument("smile quote: spot and forward must be positive");
  }
  if (!std::isfinite(rate)) throw std::invalid_argument("smile quote: rate must be finite");
  std::set<double> seen;
  for (const auto& pt : points) {
    if (!(pt.delta > 0.0) || !(pt.delta < 1.0)) {
      throw std::invalid_argument("smile quote: deltas must lie in (0,1)");
    }
    if (!(pt.sigma > 0.0)) throw std::invalid_argument("smile quote: vols must be positive");
    if (!seen.insert(pt.delta).second) {
      throw std::invalid_argument("smile quote: duplicate delta");
    }
  }
}

double SplineFit::value(double delta) const {
  if (delta <= knots.front()) return values.front();
  if (delta >= knots.back()) return values.back();
  const int i = find_interval(knots, delta);
  const double h = knots[i + 1] - knots[i];
  const double u = knots[i + 1] - delta;
  const double w = delta - knots[i];
  return second_derivs[i] * u * u * u / (6.0 * h) + second_derivs[i + 1] * w * w * w / (6.0 * h) +
         (values[i] / h - second_derivs[i] * h / 6.0) * u +
         (values[i + 1] / h - second_derivs[i + 1] * h / 6.0) * w;
}

double SplineFit::derivative(double delta) const {
  if (delta <= knots.front() || delta >= knots.back()) return 0.0;
  const int i = find_interval(knots, delta);
  const double h = knots[i + 1] - knots[i];
  const double u = knots[i + 1] - delta;
  const double w = delta - knots[i];
  return -second_derivs[i] * u * u / (2.0 * h) + second_derivs[i + 1] * w * w / (2.0 * h) -
         (values[i] / h - second_derivs[i] * h / 6.0) +
         (values[i + 1] / h - second_derivs[i + 1] * h / 6.0);
}

double SplineFit::second_derivative(double delta) const {
  if (delta <= knots.front() || delta >= knots.back()) return 0.0;
  const int i = find_interval(knots, delta);
  const double h = knots[i + 1] - knots[i];
  return (second_derivs[i] * (knots[i + 1] - delta) + second_derivs[i + 1] * (delta - knots[i])) /
         h;
}

double SplineFit::roughness() const {
  // The second derivative is piecewise linear, so each interval integrates in
  // closed form: h/3 * (g_i^2 + g_i g_{i+1} + g_{i+1}^2).
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double h = knots[i + 1] - knots[i];
    const double a = second_derivs[i], b = second_derivs[i + 1];
    total += h / 3.0 * (a * a + a * b + b * b);
  }
  return total;
}

double SplineFit::objective(double lambda_eval) const {
  double fit_term = 0.0;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double r = observed[i] - value(knots[i]);
    fit_term += weights[i] * r * r;
  }
  return lambda_eval * fit_term + (1.0 - lambda_eval) * roughness();
}

double bs_call_price(double forward, double strike, double sigma, double tau, double rate) {
  if (!(forward > 0.0) || !(strike > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("bs_call_price: forward, strike, tau must be positive");
  }
  const double disc = std::exp(-rate * tau);
  if (!(sigma > 0.0)) return disc * std::max(forward - strike, 0.0);
  const double sq = sigma * std::sqrt(tau);
  const double d1 = (std::log(forward / strike) + 0.5 * sigma * sigma * tau) / sq;
  const double d2 = d1 - sq;
  return disc * (forward * norm_cdf(d1) - strike * norm_cdf(d2));
}

double bs_delta(double forward, double strike, double sigma, double tau) {
  if (!(forward > 0.0) || !(strike > 0.0) || !(sigma > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("bs_delta: arguments must be positive");
  }
  const double sq = sigma * std::sqrt(tau);
  return norm_cdf((std::log(forward / strike) + 0.5 * sigma * sigma * tau) / sq);
}

double bs_vega(double forward, double strike, double sigma, double tau, double rate) {
  if (!(forward > 0.0) || !(strike > 0.0) || !(sigma > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("bs_vega: arguments must be positive");
  }
  const double sq = sigma * std::sqrt(tau);
  const double d1 = (std::log(forward / strike) + 0.5 * sigma * sigma * tau) / sq;
  return std::exp(-rate * tau) * forward * norm_pdf(d1) * std::sqrt(tau);
}

double bs_strike_from_delta(double forward, double delta, double sigma, double tau) {
  if (!(delta > 0.0) || !(delta < 1.0)) {
    throw std::invalid_argument("bs_strike_from_delta: delta must lie in (0,1)");
  }
  if (!(forward > 0.0) || !(sigma > 0.0) || !(tau > 0.0)) {
    throw std::invalid_argument("bs_strike_from_delta: arguments must be positive");
  }
  return forward * std::exp(0.5 * sigma * sigma * tau - sigma * std::sqrt(tau) * norm_cdf_inv(delta));
}

double bs_implied_vol(double forward, double strike, double price, double tau, double rate) {
  const double disc = std::exp(-rate * tau);
  const double intrinsic = disc * std::max(forward - strike, 0.0);
  const double upper_bound = disc * forward;
  if (!(price > intrinsic) || !(price < upper_bound)) {
    throw std::invalid_argument("bs_implied_vol: price outside the no-arbitrage band");
  }
  double lo = 1e-6, hi = 5.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (bs_call_price(forward, strike, mid, tau, rate) > price) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SplineFit fit_smile_spline(const SmileQuote& quote, double lambda) {
  quote.validate();
  if (!(lambda > 0.0) || lambda > 1.0) {
    throw std::invalid_argument("fit_smile_spline: lambda must lie in (0,1]");
  }

  std::vector<SmilePoint> pts = quote.points;
  std::sort(pts.begin(), pts.end(),
            [](const SmilePoint& a, const SmilePoint& b) { return a.delta < b.delta; });
  const int n = static_cast<int>(pts.size());

  SplineFit fit;
  fit.lambda = lambda;
  fit.knots.resize(n);
  fit.observed.resize(n);
  fit.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    fit.knots[i] = pts[i].delta;
    fit.observed[i] = pts[i].sigma;
    const double k = bs_strike_from_delta(quote.forward, pts[i].delta, pts[i].sigma, quote.tenor);
    fit.weights[i] = bs_vega(quote.forward, k, pts[i].sigma, quote.tenor, quote.rate);
  }
  const double wsum = std::accumulate(fit.weights.begin(), fit.weights.end(), 0.0);
  if (!(wsum > 0.0)) throw std::runtime_error("fit_smile_spline: degenerate vega weights");
  for (double& w : fit.weights) w /= wsum;

  // Reinsch formulation. With interior second derivatives g2 satisfying
  // Q' g = R g2, the fitted values solve (lambda W + (1-lambda) Q R^{-1} Q') g
  // = lambda W y.
  const int m = n - 2;
  std::vector<double> h(n - 1);
  for (int i = 0; i + 1 < n; ++i) h[i] = fit.knots[i + 1] - fit.knots[i];

  std::vector<double> r_mat(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> qt(static_cast<std::size_t>(m) * n, 0.0);  // m x n
  for (int k = 0; k < m; ++k) {
    const int i = k + 1;  // interior knot index
    r_mat[k * m + k] = (h[i - 1] + h[i]) / 3.0;
    if (k + 1 < m) {
      r_mat[k * m + k + 1] = h[i] / 6.0;
      r_mat[(k + 1) * m + k] = h[i] / 6.0;
    }
    qt[k * n + i - 1] = 1.0 / h[i - 1];
    qt[k * n + i] = -1.0 / h[i - 1] - 1.0 / h[i];
    qt[k * n + i + 1] = 1.0 / h[i];
  }

  // x_mat = R^{-1} Q' (m x n), one solve per column of Q'.
  std::vector<double> x_mat(static_cast<std::size_t>(m) * n, 0.0);
  for (int c = 0; c < n; ++c) {
    std::vector<double> rhs(m);
    for (int k = 0; k < m; ++k) rhs[k] = qt[k * n + c];
    std::vector<double> col = solve_dense(r_mat, rhs);
    for (int k = 0; k < m; ++k) x_mat[k * n + c] = col[k];
  }

  // A = lambda W + (1-lambda) Q R^{-1} Q'.
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> b(n, 0.0);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      double kij = 0.0;
      for (int k = 0; k < m; ++k) kij += qt[k * n + r] * x_mat[k * n + c];
      a[r * n + c] = (1.0 - lambda) * kij;
    }
    a[r * n + r] += lambda * fit.weights[r];
    b[r] = lambda * fit.weights[r] * fit.observed[r];
  }
  fit.values = solve_dense(std::move(a), std::move(b));

  fit.second_derivs.assign(n, 0.0);
  for (int k = 0; k < m; ++k) {
    double s = 0.0;
    for (int c = 0; c < n; ++c) s += x_mat[k * n + c] * fit.values[c];
    fit.second_derivs[k + 1] = s;
  }
  return fit;
}

RndCurve extract_rnd(const SplineFit& fit, const SmileQuote& quote, int strike_grid_size) {
  quote.validate();
  if (strike_grid_size < 10) {
    throw std::invalid_argument("extract_rnd: strike grid too small");
  }
  const double tau = quote.tenor;
  const double fwd = quote.forward;
  const double anchor = fit.value(0.5);

  // Strike grid spanning the [1e-4, 1-1e-4] quantiles of the flat-vol
  // lognormal anchor.
  const double sq0 = anchor * std::sqrt(tau);
  const double k_lo = fwd * std::exp(-0.5 * sq0 * sq0 + sq0 * norm_cdf_inv(1e-4));
  const double k_hi = fwd * std::exp(-0.5 * sq0 * sq0 + sq0 * norm_cdf_inv(1.0 - 1e-4));
  const int n = strike_grid_size;
  const double step = (k_hi - k_lo) / (n - 1);

  std::vector<double> prices(n);
  for (int i = 0; i < n; ++i) {
    const double k = k_lo + step * i;
    // Fixed-point smile lookup: the strike's delta depends on its own vol.
    double s = anchor;
    for (int it = 0; it < 100; ++it) {
      const double s_new = fit.value(bs_delta(fwd, k, s, tau));
      if (std::fabs(s_new - s) < 1e-14) {
        s = s_new;
        break;
      }
      s = s_new;
    }
    prices[i] = bs_call_price(fwd, k, s, tau, quote.rate);
  }

  std::vector<double> strikes(n - 2), pdf(n - 2);
  const double undisc = std::exp(quote.rate * tau);
  for (int i = 1; i + 1 < n; ++i) {
    strikes[i - 1] = k_lo + step * i;
    pdf[i - 1] = undisc * (prices[i + 1] - 2.0 * prices[i] + prices[i - 1]) / (step * step);
  }

  double pos_mass = 0.0, neg_mass = 0.0;
  for (std::size_t i = 0; i + 1 < pdf.size(); ++i) {
    const double avg = 0.5 * (pdf[i] + pdf[i + 1]);
    if (avg >= 0.0) {
      pos_mass += avg * step;
    } else {
      neg_mass -= avg * step;
    }
  }
  if (!(pos_mass > 0.0)) throw std::runtime_error("extract_rnd: empty density");
  if (neg_mass > 0.05 * pos_mass) {
    throw std::runtime_error("extract_rnd: more than 5% of probability mass clipped");
  }
  for (double& f : pdf) f = std::max(f, 0.0);

  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < pdf.size(); ++i) mass += 0.5 * (pdf[i] + pdf[i + 1]) * step;
  for (double& f : pdf) f /= mass;

  std::vector<double> cdf(pdf.size(), 0.0);
  for (std::size_t i = 1; i < pdf.size(); ++i) {
    cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] + pdf[i - 1]) * step;
  }
  const double total = cdf.back();
  for (double& c : cdf) c /= total;
  for (double& f : pdf) f /= total;

  return RndCurve::numeric(std::move(strikes), std::move(pdf), std::move(cdf));
}

PitPanel pits_from_surface(const std::vector<SmileQuote>& quotes,
                           const std::map<std::string, std::map<double, double>>& realized) {
  if (quotes.empty()) throw std::invalid_argument("pits_from_surface: no quotes");

  std::set<double> tenor_set;
  std::map<std::string, std::map<double, const SmileQuote*>> by_date;
  for (const auto& q : quotes) {
    q.validate();
    tenor_set.insert(q.tenor);
    by_date[q.date][q.tenor] = &q;
  }
  const std::vector<double> tenors(tenor_set.begin(), tenor_set.end());
  const int m = static_cast<int>(tenors.size());

  std::vector<std::string> dates;
  std::vector<double> values;
  for (const auto& [date, slices] : by_date) {
    auto realized_it = realized.find(date);
    bool complete = realized_it != realized.end();
    if (complete) {
      for (double tenor : tenors) {
        if (slices.find(tenor) == slices.end() ||
            realized_it->second.find(tenor) == realized_it->second.end()) {
          complete = false;
          break;
        }
      }
    }
    if (!complete) {
      std::fprintf(stderr, "pits_from_surface: dropping incomplete date %s\n", date.c_str());
      continue;
    }
    std::vector<double> row(m);
    for (int j = 0; j < m; ++j) {
      const SmileQuote& q = *slices.at(tenors[j]);
      const RndCurve curve = extract_rnd(fit_smile_spline(q), q);
      const double level = realized_it->second.at(tenors[j]);
      if (level < curve.strikes().front() || level > curve.strikes().back()) {
        std::fprintf(stderr,
                     "pits_from_surface: realized level %.6g outside the strike grid on %s, "
                     "PIT clamped\n",
                     level, date.c_str());
      }
      row[j] = curve.cdf(level);
    }
    dates.push_back(date);
    values.insert(values.end(), row.begin(), row.end());
  }
  if (dates.empty()) {
    throw std::runtime_error("pits_from_surface: no date has a complete quote/realized set");
  }
  return PitPanel(std::move(dates), m, std::move(values));
}

}  // namespace betamrf
