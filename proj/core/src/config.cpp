#include "betamrf/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace betamrf {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(key + ": not a number: '" + value + "'");
  }
}

int to_int(const std::string& key, const std::string& value) {
  const double v = to_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw std::invalid_argument(key + ": not an integer");
  return i;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument(key + ": not a boolean: '" + value + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw std::invalid_argument(key + ": empty list");
  return out;
}

}  // namespace

NeighborhoodSystem ExperimentConfig::neighborhood() const {
  return NeighborhoodSystem(topology, static_cast<int>(tenors.size()));
}

MaturityGrid ExperimentConfig::maturity_grid() const {
  return MaturityGrid(tenors, gbm.steps_per_year);
}

ThetaLayout ExperimentConfig::layout() const {
  return ThetaLayout::make(neighborhood(), p, pooled);
}

void ExperimentConfig::validate() const {
  if (p < 0) throw std::invalid_argument("model.p: must be non-negative");
  hyper.validate();
  sampler.validate();
  if (source == DataSource::Gbm) {
    gbm.validate();
    if (tenors.empty()) throw std::invalid_argument("data.tenors: must be non-empty");
    std::vector<double> sorted_tenors = tenors;
    std::sort(sorted_tenors.begin(), sorted_tenors.end());
    if (sorted_tenors != tenors || !(tenors.front() > 0.0)) {
      throw std::invalid_argument("data.tenors: must be positive and ascending");
    }
    if (tenors.back() > gbm.horizon_years) {
      throw std::invalid_argument("data.horizon_years: shorter than the largest tenor");
    }
    if (!smile_csv.empty() || !realized_csv.empty()) {
      throw std::invalid_argument("data.smile_csv: set while data.source = gbm");
    }
  } else {
    if (smile_csv.empty()) throw std::invalid_argument("data.smile_csv: required");
    if (realized_csv.empty()) throw std::invalid_argument("data.realized_csv: required");
  }
  if (!(thin >= 1.0)) throw std::invalid_argument("data.thin: must be >= 1");
  if (out_dir.empty()) throw std::invalid_argument("output.dir: must be non-empty");
}

std::map<std::string, std::string> parse_config_entries(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!entries.emplace(key, value).second) {
      throw std::invalid_argument(key + ": duplicate key");
    }
  }
  return entries;
}

ExperimentConfig config_from_text(const std::string& text) {
  const std::map<std::string, std::string> entries = parse_config_entries(text);
  ExperimentConfig cfg;
  bool seed_set = false;
  for (const auto& [key, value] : entries) {
    if (key == "model.p") {
      cfg.p = to_int(key, value);
    } else if (key == "model.topology") {
      cfg.topology = NeighborhoodSystem::kind_from_string(value);
    } else if (key == "model.pooled") {
      cfg.pooled = to_bool(key, value);
    } else if (key == "model.step1_target") {
      if (value == "posterior") {
        cfg.step1_target = SamplerConfig::Step1Target::Posterior;
      } else if (value == "prior") {
        cfg.step1_target = SamplerConfig::Step1Target::Prior;
      } else {
        throw std::invalid_argument("model.step1_target: must be 'posterior' or 'prior'");
      }
    } else if (key == "hyper.a") {
      cfg.hyper.a = to_double(key, value);
    } else if (key == "hyper.b") {
      cfg.hyper.b = to_double(key, value);
    } else if (key == "hyper.s0_sq") {
      cfg.hyper.s0_sq = to_double(key, value);
    } else if (key == "hyper.g0_sq") {
      cfg.hyper.g0_sq = to_double(key, value);
    } else if (key == "hyper.s_sq") {
      cfg.hyper.s_sq = to_double(key, value);
    } else if (key == "hyper.g_sq") {
      cfg.hyper.g_sq = to_double(key, value);
    } else if (key == "hyper.s_j_sq") {
      cfg.hyper.s_j_sq = to_double(key, value);
    } else if (key == "hyper.g_j_sq") {
      cfg.hyper.g_j_sq = to_double(key, value);
    } else if (key == "hyper.xi1") {
      cfg.hyper.xi1 = to_double(key, value);
    } else if (key == "hyper.xi2") {
      cfg.hyper.xi2 = to_double(key, value);
    } else if (key == "sampler.n_iter") {
      cfg.sampler.n_iter = to_int(key, value);
    } else if (key == "sampler.n_burnin") {
      cfg.sampler.n_burnin = to_int(key, value);
    } else if (key == "sampler.inner_sweeps") {
      cfg.sampler.inner_sweeps = to_int(key, value);
    } else if (key == "sampler.adapt") {
      cfg.sampler.adapt = to_bool(key, value);
    } else if (key == "sampler.target_rate") {
      cfg.sampler.target_rate = to_double(key, value);
    } else if (key == "sampler.adapt_window") {
      cfg.sampler.adapt_window = to_int(key, value);
    } else if (key == "sampler.seed") {
      cfg.sampler.seed = static_cast<std::uint64_t>(std::stoull(value));
      seed_set = true;
    } else if (key == "data.source") {
      if (value == "gbm") {
        cfg.source = ExperimentConfig::DataSource::Gbm;
      } else if (value == "smile") {
        cfg.source = ExperimentConfig::DataSource::Smile;
      } else {
        throw std::invalid_argument("data.source: must be 'gbm' or 'smile'");
      }
    } else if (key == "data.s0") {
      cfg.gbm.s0 = to_double(key, value);
    } else if (key == "data.mu") {
      cfg.gbm.mu = to_double(key, value);
    } else if (key == "data.r") {
      cfg.gbm.r = to_double(key, value);
    } else if (key == "data.sigma_true") {
      cfg.gbm.sigma_true = to_double(key, value);
    } else if (key == "data.sigma_rn") {
      cfg.gbm.sigma_rn = to_double(key, value);
    } else if (key == "data.horizon_years") {
      cfg.gbm.horizon_years = to_double(key, value);
    } else if (key == "data.steps_per_year") {
      cfg.gbm.steps_per_year = to_int(key, value);
    } else if (key == "data.tenors") {
      cfg.tenors = to_list(key, value);
    } else if (key == "data.start_date") {
      cfg.start_date = value;
    } else if (key == "data.thin") {
      cfg.thin = to_double(key, value);
    } else if (key == "data.smile_csv") {
      cfg.smile_csv = value;
    } else if (key == "data.realized_csv") {
      cfg.realized_csv = value;
    } else if (key == "output.dir") {
      cfg.out_dir = value;
    } else {
      throw std::invalid_argument(key + ": unknown config key");
    }
  }
  if (!seed_set) throw std::invalid_argument("sampler.seed: required (no wall-clock seeding)");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

}  // namespace betamrf
