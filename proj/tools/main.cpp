// Command-line front end: simulate | fit-rnd | sample | calibrate | report.
// Exit status: 0 success, 2 validation failure, 3 convergence warning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "betamrf/calibration.hpp"
#include "betamrf/config.hpp"
#include "betamrf/csv.hpp"
#include "betamrf/market_sim.hpp"
#include "betamrf/mcmc.hpp"
#include "betamrf/model.hpp"
#include "betamrf/rnd_curve.hpp"
#include "betamrf/smile.hpp"
#include "betamrf/special.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace betamrf;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

ExperimentConfig load_effective_config(const GlobalArgs& args) {
  ExperimentConfig cfg = load_config(args.config_path);
  if (args.seed) cfg.sampler.seed = *args.seed;
  if (args.out_dir) cfg.out_dir = *args.out_dir;
  cfg.validate();
  fs::create_directories(cfg.out_dir);
  return cfg;
}

std::string path_in(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return json::parse(in);
}

// Indices kept by thin_panel for a panel with `rows` rows.
std::vector<int> thin_indices(int rows, double factor) {
  std::vector<int> keep;
  for (int k = 0;; ++k) {
    const int idx = static_cast<int>(std::lround(k * factor));
    if (idx >= rows) break;
    keep.push_back(idx);
  }
  return keep;
}

int cmd_simulate(const ExperimentConfig& cfg) {
  if (cfg.source != ExperimentConfig::DataSource::Gbm) {
    throw std::invalid_argument("data.source: simulate requires 'gbm'");
  }
  const MaturityGrid grid = cfg.maturity_grid();
  Rng rng(cfg.sampler.seed);
  const std::vector<double> path = simulate_gbm(cfg.gbm, grid.max_lookahead_days(), rng);
  PitPanel panel = build_pit_panel(path, cfg.gbm, grid, cfg.start_date);

  // Underlying level on the last kept panel date (panel row t holds the PIT
  // observed on path index t + 1), used to anchor predictive curves later.
  const std::vector<int> keep = thin_indices(panel.rows(), cfg.thin);
  const double s_end = path[static_cast<std::size_t>(keep.back()) + 1];
  if (cfg.thin > 1.0) panel = thin_panel(panel, cfg.thin);

  write_panel_csv(path_in(cfg, "panel.csv"), panel);
  json truth;
  truth["seed"] = cfg.sampler.seed;
  truth["s0"] = cfg.gbm.s0;
  truth["mu"] = cfg.gbm.mu;
  truth["r"] = cfg.gbm.r;
  truth["sigma_true"] = cfg.gbm.sigma_true;
  truth["sigma_rn"] = cfg.gbm.sigma_rn;
  truth["horizon_years"] = cfg.gbm.horizon_years;
  truth["steps_per_year"] = cfg.gbm.steps_per_year;
  truth["tenors"] = cfg.tenors;
  truth["start_date"] = cfg.start_date;
  truth["thin"] = cfg.thin;
  truth["s_end"] = s_end;
  truth["panel_rows"] = panel.rows();
  write_json(path_in(cfg, "truth.json"), truth);
  std::cout << "simulate: wrote " << panel.rows() << " x " << panel.cols() << " panel to "
            << cfg.out_dir << "\n";
  return kExitOk;
}

int cmd_fit_rnd(const ExperimentConfig& cfg) {
  if (cfg.source != ExperimentConfig::DataSource::Smile) {
    throw std::invalid_argument("data.source: fit-rnd requires 'smile'");
  }
  const std::vector<SmileQuote> quotes = read_smile_csv(cfg.smile_csv);
  const auto realized = read_realized_csv(cfg.realized_csv);

  fs::create_directories(fs::path(cfg.out_dir) / "curves");
  json index = json::object();
  int written = 0, skipped = 0;
  std::vector<SmileQuote> usable;
  for (const auto& q : quotes) {
    const std::string file =
        "curves/curve_" + q.date + "_" + format_sig(q.tenor, 12) + ".csv";
    try {
      const SplineFit fit = fit_smile_spline(q);
      const RndCurve curve = extract_rnd(fit, q);
      write_curve_csv(path_in(cfg, file), curve);
      index[q.date][format_sig(q.tenor, 12)] = file;
      usable.push_back(q);
      ++written;
    } catch (const std::exception& e) {
      std::cerr << "fit-rnd: skipping " << q.date << " tenor " << q.tenor << ": " << e.what()
                << "\n";
      ++skipped;
    }
  }
  if (usable.empty()) throw std::runtime_error("fit-rnd: every curve fit failed");
  write_json(path_in(cfg, "curves/index.json"), index);

  const PitPanel panel = pits_from_surface(usable, realized);
  write_panel_csv(path_in(cfg, "panel.csv"), panel);
  std::cout << "fit-rnd: " << written << " curves written, " << skipped << " skipped, panel "
            << panel.rows() << " x " << panel.cols() << "\n";
  return kExitOk;
}

int cmd_sample(const ExperimentConfig& cfg) {
  if (cfg.sampler.n_iter < 1) {
    throw std::invalid_argument("sampler.n_iter: must be >= 1 to draw a posterior sample");
  }
  const PitPanel panel = read_panel_csv(path_in(cfg, "panel.csv"));
  const NeighborhoodSystem nbhd(cfg.topology, panel.cols());
  const ThetaLayout layout = ThetaLayout::make(nbhd, cfg.p, cfg.pooled);
  SamplerConfig sampler = cfg.sampler;
  sampler.step1_target = cfg.step1_target;
  const ChainOutput chain = run_chain(panel, nbhd, cfg.hyper, layout, sampler);

  write_draws_csv(path_in(cfg, "draws.csv"), chain);

  int flagged = 0, usable = 0;
  for (double z : chain.geweke_z) {
    if (std::isnan(z)) continue;
    ++usable;
    if (std::fabs(z) > 1.96) ++flagged;
  }
  const double flagged_fraction = usable > 0 ? static_cast<double>(flagged) / usable : 0.0;

  json diag;
  diag["accept_rate_outer"] = chain.accept_rate_outer;
  diag["accept_rate_exchange"] = chain.accept_rate_exchange;
  diag["accept_rate_inner"] = chain.accept_rate_inner;
  json gz = json::array();
  for (double z : chain.geweke_z) {
    if (std::isnan(z)) {
      gz.push_back(nullptr);
    } else {
      gz.push_back(z);
    }
  }
  diag["geweke_z"] = gz;
  diag["geweke_flagged_fraction"] = flagged_fraction;
  diag["parameter_names"] = chain.names;
  diag["n_iter"] = chain.n_iter;
  diag["layout"] = {{"p", cfg.p},
                    {"topology", NeighborhoodSystem::kind_to_string(cfg.topology)},
                    {"pooled", cfg.pooled},
                    {"sites", panel.cols()}};
  write_json(path_in(cfg, "diagnostics.json"), diag);

  // Wall-clock timing is environment-dependent, so it lives in its own file
  // and never in the deterministic outputs.
  write_json(path_in(cfg, "timing.json"), json{{"sample_runtime_seconds", chain.runtime_seconds}});

  const std::vector<ParamSummary> table = summarize(chain);
  std::ofstream sum(path_in(cfg, "summary.csv"));
  sum << "name,mean,ci_low,ci_high\n";
  for (const auto& row : table) {
    sum << row.name << ',' << format_sig(row.mean, 12) << ',' << format_sig(row.ci_low, 12) << ','
        << format_sig(row.ci_high, 12) << "\n";
  }
  sum.close();

  std::cout << "sample: " << chain.n_iter << " draws, outer accept " << chain.accept_rate_outer
            << ", exchange accept " << chain.accept_rate_exchange << ", geweke flagged "
            << flagged << "/" << usable << "\n";
  if (flagged_fraction > 0.20) {
    std::cerr << "sample: convergence warning, |z| > 1.96 on more than 20% of coordinates\n";
    return kExitConvergence;
  }
  return kExitOk;
}

// Risk-neutral curve per site at the last panel date: analytic lognormal in
// the simulated world, the last fitted curve file otherwise.
std::vector<RndCurve> load_terminal_curves(const ExperimentConfig& cfg, int sites) {
  std::vector<RndCurve> curves;
  if (cfg.source == ExperimentConfig::DataSource::Gbm) {
    const json truth = read_json(path_in(cfg, "truth.json"));
    const double s_end = truth.at("s_end").get<double>();
    const double r = truth.at("r").get<double>();
    const double sigma_rn = truth.at("sigma_rn").get<double>();
    const std::vector<double> tenors = truth.at("tenors").get<std::vector<double>>();
    if (static_cast<int>(tenors.size()) != sites) {
      throw std::runtime_error("truth.json: tenor count does not match the panel");
    }
    for (double tau : tenors) {
      curves.push_back(RndCurve::analytic_lognormal(s_end, r, sigma_rn, tau));
    }
    return curves;
  }
  const json index = read_json(path_in(cfg, "curves/index.json"));
  if (index.empty()) throw std::runtime_error("curves/index.json: empty");
  const auto& last_date = *std::prev(index.items().end());
  std::vector<std::pair<double, std::string>> by_tenor;
  for (const auto& [tenor_str, file] : last_date.value().items()) {
    by_tenor.emplace_back(std::stod(tenor_str), file.get<std::string>());
  }
  std::sort(by_tenor.begin(), by_tenor.end());
  if (static_cast<int>(by_tenor.size()) != sites) {
    throw std::runtime_error("curves/index.json: last date does not cover every tenor");
  }
  for (const auto& [tenor, file] : by_tenor) curves.push_back(read_curve_csv(path_in(cfg, file)));
  return curves;
}

int cmd_calibrate(const ExperimentConfig& cfg) {
  const PitPanel panel = read_panel_csv(path_in(cfg, "panel.csv"));
  const NeighborhoodSystem nbhd(cfg.topology, panel.cols());
  const ThetaLayout layout = ThetaLayout::make(nbhd, cfg.p, cfg.pooled);
  const ChainOutput chain = read_draws_csv(path_in(cfg, "draws.csv"), layout);
  if (chain.n_iter == 0) throw std::runtime_error("draws.csv: no draws");
  if (panel.rows() <= cfg.p) throw std::runtime_error("panel too short for the configured p");

  const std::vector<RndCurve> curves = load_terminal_curves(cfg, panel.cols());

  // Filtering convention: condition on the PITs observed on the last date.
  const int last = panel.rows() - 1;
  for (int j = 0; j < panel.cols(); ++j) {
    ConditioningInfo cond;
    for (int k = 1; k <= cfg.p; ++k) cond.own_lags.push_back(panel.at(last - k + 1, j));
    for (int i : nbhd.neighbors(j)) cond.neighbor_pits.emplace_back(i, panel.at(last, i));
    const CalibratedCurve cal = calibrate_density(curves[j], chain, j, cond);
    write_calibrated_csv(path_in(cfg, "calibrated_tenor_" + std::to_string(j + 1) + ".csv"), cal);
  }

  const std::vector<PitEcdf> ecdfs = calibrated_pit_cdf(panel, chain, nbhd);
  json ks = json::array();
  for (int j = 0; j < panel.cols(); ++j) {
    write_ecdf_csv(path_in(cfg, "ecdf_tenor_" + std::to_string(j + 1) + ".csv"), ecdfs[j]);
    ks.push_back({{"tenor_index", j + 1},
                  {"ks_uncalibrated", ks_distance(ecdfs[j].uncal_sample)},
                  {"ks_calibrated", ks_distance(ecdfs[j].cal_sample)}});
  }
  write_json(path_in(cfg, "ks.json"), json{{"per_tenor", ks}});
  std::cout << "calibrate: wrote " << panel.cols() << " calibrated curves and PIT diagnostics\n";
  return kExitOk;
}

json report_schema() {
  // Built field by field: nested brace-init of nlohmann::json is ambiguous
  // between objects and arrays.
  json item_schema = json::object();
  item_schema["type"] = "object";
  item_schema["required"] = json::array({"name", "mean", "ci_low", "ci_high"});

  json props = json::object();
  props["parameters"] = json::object();
  props["parameters"]["type"] = "array";
  props["parameters"]["items"] = item_schema;
  props["acceptance"] = json::object();
  props["acceptance"]["type"] = "object";
  props["acceptance"]["required"] = json::array({"outer", "exchange", "inner"});
  props["geweke"] = json::object();
  props["geweke"]["type"] = "object";
  props["geweke"]["required"] = json::array({"z", "flagged_fraction"});
  props["ks"] = json::object();
  props["ks"]["type"] = "array";
  props["timing_file"] = json::object();
  props["timing_file"]["type"] = "string";

  json schema = json::object();
  schema["type"] = "object";
  schema["required"] = json::array({"parameters", "acceptance", "geweke", "ks", "timing_file"});
  schema["properties"] = props;
  return schema;
}

// Minimal structural check of the report against its published schema:
// required keys present with the right JSON types.
void validate_against_schema(const json& doc, const json& schema) {
  if (schema.value("type", "") == "object") {
    if (!doc.is_object()) throw std::runtime_error("report schema: expected object");
    for (const auto& key : schema.value("required", json::array())) {
      if (!doc.contains(key.get<std::string>())) {
        throw std::runtime_error("report schema: missing key " + key.get<std::string>());
      }
    }
    const json props = schema.value("properties", json::object());
    for (const auto& [key, sub] : props.items()) {
      if (!doc.contains(key)) continue;
      const std::string type = sub.value("type", "");
      const json& v = doc.at(key);
      if (type == "array" && !v.is_array()) {
        throw std::runtime_error("report schema: " + key + " must be an array");
      }
      if (type == "object" && !v.is_object()) {
        throw std::runtime_error("report schema: " + key + " must be an object");
      }
      if (type == "string" && !v.is_string()) {
        throw std::runtime_error("report schema: " + key + " must be a string");
      }
      if (type == "array" && sub.contains("items")) {
        for (const auto& item : v) validate_against_schema(item, sub.at("items"));
      }
    }
  }
}

int cmd_report(const ExperimentConfig& cfg) {
  std::vector<std::string> missing;
  for (const char* name : {"diagnostics.json", "summary.csv", "ks.json"}) {
    if (!fs::exists(path_in(cfg, name))) missing.emplace_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "report: missing inputs:";
    for (const auto& name : missing) msg += " " + name;
    throw std::runtime_error(msg);
  }

  const json diag = read_json(path_in(cfg, "diagnostics.json"));
  const json ks = read_json(path_in(cfg, "ks.json"));

  json params = json::array();
  {
    std::ifstream in(path_in(cfg, "summary.csv"));
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      std::vector<std::string> fields;
      std::size_t start = 0;
      for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
          fields.push_back(line.substr(start, i - start));
          start = i + 1;
        }
      }
      if (fields.size() != 4) throw std::runtime_error("summary.csv: malformed row");
      params.push_back({{"name", fields[0]},
                        {"mean", std::stod(fields[1])},
                        {"ci_low", std::stod(fields[2])},
                        {"ci_high", std::stod(fields[3])}});
    }
  }

  json report;
  report["parameters"] = params;
  report["acceptance"] = {{"outer", diag.at("accept_rate_outer")},
                          {"exchange", diag.at("accept_rate_exchange")},
                          {"inner", diag.at("accept_rate_inner")}};
  report["geweke"] = {{"z", diag.at("geweke_z")},
                      {"flagged_fraction", diag.at("geweke_flagged_fraction")}};
  report["ks"] = ks.at("per_tenor");
  report["timing_file"] = "timing.json";

  const json schema = report_schema();
  validate_against_schema(report, schema);
  write_json(path_in(cfg, "report.schema.json"), schema);
  write_json(path_in(cfg, "report.json"), report);
  std::cout << "report: wrote report.json (" << params.size() << " parameters)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint calibration of implied risk-neutral densities via a dynamic beta MRF"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::uint64_t seed_value = 0;
  std::string out_value;
  app.add_option("--config", args.config_path, "Path to the experiment config file")
      ->required();
  auto* seed_opt = app.add_option("--seed", seed_value, "Override sampler.seed");
  auto* out_opt = app.add_option("--out", out_value, "Override output.dir");

  auto* sub_simulate = app.add_subcommand("simulate", "Simulate the GBM world and write the PIT panel");
  auto* sub_fit_rnd = app.add_subcommand("fit-rnd", "Fit smiles, extract risk-neutral curves, build the PIT panel");
  auto* sub_sample = app.add_subcommand("sample", "Run the double MH sampler on the panel");
  auto* sub_calibrate = app.add_subcommand("calibrate", "Deform curves with posterior draws and build PIT diagnostics");
  auto* sub_report = app.add_subcommand("report", "Aggregate outputs into report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (seed_opt->count() > 0) args.seed = seed_value;
  if (out_opt->count() > 0) args.out_dir = out_value;

  try {
    const ExperimentConfig cfg = load_effective_config(args);
    if (sub_simulate->parsed()) return cmd_simulate(cfg);
    if (sub_fit_rnd->parsed()) return cmd_fit_rnd(cfg);
    if (sub_sample->parsed()) return cmd_sample(cfg);
    if (sub_calibrate->parsed()) return cmd_calibrate(cfg);
    if (sub_report->parsed()) return cmd_report(cfg);
    std::cerr << "error: no subcommand\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
