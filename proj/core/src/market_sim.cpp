#include "betamrf/market_sim.hpp"

#include <cmath>
#include <stdexcept>

#include "betamrf/dates.hpp"
#include "betamrf/special.hpp"

namespace betamrf {

void GbmSpec::validate() const {
  if (!(s0 > 0.0)) throw std::invalid_argument("GbmSpec: s0 must be > 0");
  if (!(sigma_true > 0.0)) throw std::invalid_argument("GbmSpec: sigma_true must be > 0");
  if (!(sigma_rn > 0.0)) throw std::invalid_argument("GbmSpec: sigma_rn must be > 0");
  if (!(horizon_years > 0.0)) throw std::invalid_argument("GbmSpec: horizon_years must be > 0");
  if (steps_per_year < 1) throw std::invalid_argument("GbmSpec: steps_per_year must be >= 1");
}

int GbmSpec::horizon_steps() const {
  return static_cast<int>(std::lround(horizon_years * steps_per_year));
}

std::vector<double> simulate_gbm(const GbmSpec& spec, int lookahead_days, Rng& rng) {
  spec.validate();
  if (lookahead_days < 0) throw std::invalid_argument("simulate_gbm: negative lookahead");
  const int n_steps = spec.horizon_steps() + lookahead_days;
  const double dt = 1.0 / spec.steps_per_year;
  const double drift = (spec.mu - 0.5 * spec.sigma_true * spec.sigma_true) * dt;
  const double vol = spec.sigma_true * std::sqrt(dt);
  std::vector<double> path(n_steps + 1);
  path[0] = spec.s0;
  for (int k = 0; k < n_steps; ++k)
    path[k + 1] = path[k] * std::exp(drift + vol * rng.normal());
  return path;
}

double lognormal_cdf(double s_future, double s_t, double r, double sigma, double tau) {
  if (!(s_future > 0.0 && s_t > 0.0)) throw std::domain_error("lognormal_cdf: prices must be > 0");
  if (!(sigma > 0.0 && tau > 0.0)) throw std::domain_error("lognormal_cdf: sigma, tau must be > 0");
  const double z =
      (std::log(s_future / s_t) - (r - 0.5 * sigma * sigma) * tau) / (sigma * std::sqrt(tau));
  return norm_cdf(z);
}

double lognormal_pdf(double s_future, double s_t, double r, double sigma, double tau) {
  if (s_future <= 0.0) return 0.0;
  if (!(s_t > 0.0 && sigma > 0.0 && tau > 0.0))
    throw std::domain_error("lognormal_pdf: invalid parameters");
  const double sd = sigma * std::sqrt(tau);
  const double z = (std::log(s_future / s_t) - (r - 0.5 * sigma * sigma) * tau) / sd;
  return norm_pdf(z) / (s_future * sd);
}

PitPanel build_pit_panel(const std::vector<double>& path, const GbmSpec& spec,
                         const MaturityGrid& grid, const std::string& start_date) {
  spec.validate();
  const int T = spec.horizon_steps();
  const int max_d = grid.max_lookahead_days();
  if (static_cast<int>(path.size()) < T + max_d + 1)
    throw std::invalid_argument("build_pit_panel: path too short for the largest tenor");
  const int M = grid.sites();
  std::vector<double> values(static_cast<std::size_t>(T) * M);
  std::vector<std::string> dates(T);
  const long base = parse_iso_date(start_date);
  for (int t = 1; t <= T; ++t) {
    dates[t - 1] = format_iso_date(base + (t - 1));
    for (int j = 0; j < M; ++j) {
      const int d = grid.lookahead_days(j);
      values[static_cast<std::size_t>(t - 1) * M + j] =
          lognormal_cdf(path[t + d], path[t], spec.r, spec.sigma_rn, grid.tenors[j]);
    }
  }
  return PitPanel(std::move(dates), M, std::move(values));
}

PitPanel thin_panel(const PitPanel& panel, double factor) {
  if (!(factor >= 1.0)) throw std::invalid_argument("thin_panel: factor must be >= 1");
  std::vector<std::string> dates;
  std::vector<double> values;
  const bool has_dates = !panel.dates().empty();
  int kept = 0;
  for (int k = 0;; ++k) {
    const long idx = std::lround(k * factor);
    if (idx >= panel.rows()) break;
    if (has_dates) dates.push_back(panel.dates()[idx]);
    for (int j = 0; j < panel.cols(); ++j) values.push_back(panel.at(static_cast<int>(idx), j));
    ++kept;
  }
  if (kept == 0) throw std::invalid_argument("thin_panel: empty result");
  return PitPanel(std::move(dates), panel.cols(), std::move(values));
}

}  // namespace betamrf
