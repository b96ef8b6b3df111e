#pragma once

#include <map>
#include <string>
#include <vector>

#include "betamrf/market_sim.hpp"
#include "betamrf/mcmc.hpp"
#include "betamrf/types.hpp"

namespace betamrf {

// Experiment configuration, loaded from a flat `section.key = value` text
// file (comments with '#', blank lines ignored). Seeds have no wall-clock
// fallback: sampler.seed is a required key.
struct ExperimentConfig {
  // model block
  int p = 1;
  NeighborhoodSystem::Kind topology = NeighborhoodSystem::Kind::Markov;
  bool pooled = false;
  SamplerConfig::Step1Target step1_target = SamplerConfig::Step1Target::Posterior;

  HyperParams hyper;
  SamplerConfig sampler;

  // data block: exactly one source
  enum class DataSource { Gbm, Smile };
  DataSource source = DataSource::Gbm;
  GbmSpec gbm;
  std::vector<double> tenors = {0.25, 0.5, 1.0};
  std::string start_date = "2020-01-02";
  double thin = 1.0;  // systematic thinning factor applied to the panel
  std::string smile_csv;
  std::string realized_csv;

  std::string out_dir = "out";

  NeighborhoodSystem neighborhood() const;
  MaturityGrid maturity_grid() const;
  ThetaLayout layout() const;

  // Throws std::invalid_argument naming the offending field.
  void validate() const;
};

// Parse the key/value syntax without interpreting the keys.
std::map<std::string, std::string> parse_config_entries(const std::string& text);

// Build and validate a config from file contents / from a file on disk.
// Unknown keys are rejected.
ExperimentConfig config_from_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace betamrf
