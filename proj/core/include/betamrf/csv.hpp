#pragma once

#include <map>
#include <string>
#include <vector>

#include "betamrf/calibration.hpp"
#include "betamrf/mcmc.hpp"
#include "betamrf/rnd_curve.hpp"
#include "betamrf/smile.hpp"
#include "betamrf/types.hpp"

namespace betamrf {

// Fixed-significant-digit formatting used by every CSV writer, so that
// write -> read -> write round-trips byte-identically.
std::string format_sig(double x, int digits);

// PIT panel: header `date,tenor_1,...,tenor_M`, ISO dates, 12 significant
// digits per value.
void write_panel_csv(const std::string& path, const PitPanel& panel);
PitPanel read_panel_csv(const std::string& path);

// Posterior draws: one column per named parameter, 17 significant digits.
// Reading requires the layout the chain was run under; acceptance rates and
// diagnostics live in the JSON sidecar, not here.
void write_draws_csv(const std::string& path, const ChainOutput& chain);
ChainOutput read_draws_csv(const std::string& path, const ThetaLayout& layout);

// Smile surface input: `date,tenor_years,spot,forward,rate,delta,sigma`, one
// row per quote point. Malformed rows raise an error naming the line number.
std::vector<SmileQuote> read_smile_csv(const std::string& path);
void write_smile_csv(const std::string& path, const std::vector<SmileQuote>& quotes);

// Realized underlying levels keyed by observation date and tenor:
// `date,tenor_years,level`.
std::map<std::string, std::map<double, double>> read_realized_csv(const std::string& path);
void write_realized_csv(const std::string& path,
                        const std::map<std::string, std::map<double, double>>& realized);

// Risk-neutral curve grid: `strike,pdf,cdf`.
void write_curve_csv(const std::string& path, const RndCurve& curve);
RndCurve read_curve_csv(const std::string& path);

// Calibrated curve: `strike,pdf_mean,pdf_lo,pdf_hi,cdf_mean`.
void write_calibrated_csv(const std::string& path, const CalibratedCurve& curve);
CalibratedCurve read_calibrated_csv(const std::string& path);

// PIT-uniformity diagnostic: `u,ecdf_uncal,ecdf_cal`.
void write_ecdf_csv(const std::string& path, const PitEcdf& ecdf);
PitEcdf read_ecdf_csv(const std::string& path);

}  // namespace betamrf
