#include "betamrf/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace betamrf {

MaturityGrid::MaturityGrid(std::vector<double> tenors_, int tdpy)
    : tenors(std::move(tenors_)), trading_days_per_year(tdpy) {
  if (tenors.empty()) throw std::invalid_argument("MaturityGrid: need at least one tenor");
  if (trading_days_per_year < 1)
    throw std::invalid_argument("MaturityGrid: trading_days_per_year must be positive");
  for (std::size_t i = 0; i < tenors.size(); ++i) {
    if (!(tenors[i] > 0.0)) throw std::invalid_argument("MaturityGrid: tenors must be positive");
    if (i > 0 && !(tenors[i] > tenors[i - 1]))
      throw std::invalid_argument("MaturityGrid: tenors must be strictly increasing");
  }
}

int MaturityGrid::lookahead_days(int j) const {
  return static_cast<int>(std::lround(tenors.at(j) * trading_days_per_year));
}

int MaturityGrid::max_lookahead_days() const { return lookahead_days(sites() - 1); }

PitPanel::PitPanel(std::vector<std::string> dates, int cols, std::vector<double> values)
    : dates_(std::move(dates)), cols_(cols), values_(std::move(values)) {
  if (cols_ < 1) throw std::invalid_argument("PitPanel: need at least one column");
  if (values_.size() % cols_ != 0)
    throw std::invalid_argument("PitPanel: values size not a multiple of column count");
  rows_ = static_cast<int>(values_.size() / cols_);
  if (!dates_.empty() && static_cast<int>(dates_.size()) != rows_)
    throw std::invalid_argument("PitPanel: date index length does not match row count");
  for (double& y : values_) {
    if (std::isnan(y)) throw std::invalid_argument("PitPanel: NaN entry");
    y = std::clamp(y, kClamp, 1.0 - kClamp);
  }
}

void PitPanel::set(int t, int j, double y) {
  values_[static_cast<std::size_t>(t) * cols_ + j] = std::clamp(y, kClamp, 1.0 - kClamp);
}

NeighborhoodSystem::NeighborhoodSystem(Kind kind, int sites) : kind_(kind), sites_(sites) {
  if (sites_ < 1) throw std::invalid_argument("NeighborhoodSystem: need at least one site");
  neighbors_.assign(sites_, {});
  for (int j = 0; j < sites_; ++j) {
    switch (kind_) {
      case Kind::Independent:
        break;
      case Kind::Markov:
        if (j > 0) neighbors_[j] = {j - 1};
        break;
      case Kind::Proximity:
        if (j > 0) neighbors_[j].push_back(j - 1);
        if (j + 1 < sites_) neighbors_[j].push_back(j + 1);
        break;
    }
  }
  dependents_.assign(sites_, {});
  for (int i = 0; i < sites_; ++i)
    for (int j : neighbors_[i]) dependents_[j].push_back(i);
  for (auto& d : dependents_) std::sort(d.begin(), d.end());
}

int NeighborhoodSystem::total_degree() const {
  int m = 0;
  for (const auto& n : neighbors_) m += static_cast<int>(n.size());
  return m;
}

NeighborhoodSystem::Kind NeighborhoodSystem::kind_from_string(const std::string& s) {
  if (s == "independent") return Kind::Independent;
  if (s == "markov") return Kind::Markov;
  if (s == "proximity") return Kind::Proximity;
  throw std::invalid_argument("unknown topology kind: " + s);
}

std::string NeighborhoodSystem::kind_to_string(Kind k) {
  switch (k) {
    case Kind::Independent: return "independent";
    case Kind::Markov: return "markov";
    case Kind::Proximity: return "proximity";
  }
  return "?";
}

void HyperParams::validate() const {
  auto pos = [](double x, const char* name) {
    if (!(x > 0.0)) throw std::invalid_argument(std::string("HyperParams: ") + name + " must be > 0");
  };
  pos(s0_sq, "s0_sq");
  pos(g0_sq, "g0_sq");
  pos(s_sq, "s_sq");
  pos(g_sq, "g_sq");
  pos(s_j_sq, "s_j_sq");
  pos(g_j_sq, "g_j_sq");
  pos(xi1, "xi1");
  pos(xi2, "xi2");
}

void BetaLocalParams::validate() const {
  if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("BetaLocalParams: mu must be in (0,1)");
  if (!(gamma > 0.0)) throw std::domain_error("BetaLocalParams: gamma must be > 0");
}

namespace {

// Pooled beta coefficients are indexed by neighbor role: 0 = predecessor
// maturity, 1 = successor. Which roles exist follows from the topology.
bool role_present(NeighborhoodSystem::Kind kind, int sites, int role) {
  if (sites < 2) return false;
  if (kind == NeighborhoodSystem::Kind::Independent) return false;
  if (role == 0) return true;
  return kind == NeighborhoodSystem::Kind::Proximity;
}

}  // namespace

ThetaLayout ThetaLayout::make(const NeighborhoodSystem& nbhd, int p, bool pooled) {
  if (p < 0) throw std::invalid_argument("ThetaLayout: lag order p must be >= 0");
  ThetaLayout l;
  l.sites_ = nbhd.sites();
  l.p_ = p;
  l.pooled_ = pooled;
  l.kind_ = nbhd.kind();
  l.neighbors_.resize(l.sites_);
  for (int j = 0; j < l.sites_; ++j) l.neighbors_[j] = nbhd.neighbors(j);
  if (pooled) {
    l.pooled_roles_ = (role_present(l.kind_, l.sites_, 0) ? 1 : 0) +
                      (role_present(l.kind_, l.sites_, 1) ? 1 : 0);
    l.dim_ = (p + 1) + l.pooled_roles_ + 1 + 2 + 2;
  } else {
    l.site_offset_.resize(l.sites_);
    int off = 0;
    for (int j = 0; j < l.sites_; ++j) {
      l.site_offset_[j] = off;
      off += (p + 1) + static_cast<int>(l.neighbors_[j].size()) + 3;
    }
    l.dim_ = off + 2;
  }
  return l;
}

int ThetaLayout::alpha_index(int j, int k) const {
  if (k < 0 || k > p_) throw std::out_of_range("alpha_index: lag out of range");
  if (pooled_) return k;
  return site_offset_.at(j) + k;
}

int ThetaLayout::beta_index(int j, int neighbor_site) const {
  if (pooled_) {
    int role = neighbor_site < j ? 0 : 1;
    if (!role_present(kind_, sites_, role))
      throw std::out_of_range("beta_index: role not present in pooled layout");
    int slot = (role == 1 && role_present(kind_, sites_, 0)) ? 1 : 0;
    return (p_ + 1) + slot;
  }
  const auto& nb = neighbors_.at(j);
  auto it = std::find(nb.begin(), nb.end(), neighbor_site);
  if (it == nb.end()) throw std::out_of_range("beta_index: site is not a neighbor");
  return site_offset_[j] + (p_ + 1) + static_cast<int>(it - nb.begin());
}

int ThetaLayout::sigma_index(int j) const {
  if (pooled_) return (p_ + 1) + pooled_roles_;
  return site_offset_.at(j) + (p_ + 1) + static_cast<int>(neighbors_[j].size());
}

int ThetaLayout::mean_alpha_index(int j) const { return sigma_index(j) + 1; }
int ThetaLayout::mean_beta_index(int j) const { return sigma_index(j) + 2; }
int ThetaLayout::alpha_bar_index() const { return dim_ - 2; }
int ThetaLayout::beta_bar_index() const { return dim_ - 1; }

bool ThetaLayout::is_sigma_coord(int i) const {
  if (pooled_) return i == sigma_index(0);
  for (int j = 0; j < sites_; ++j)
    if (i == sigma_index(j)) return true;
  return false;
}

std::vector<std::string> ThetaLayout::names() const {
  std::vector<std::string> n(dim_);
  if (pooled_) {
    for (int k = 0; k <= p_; ++k) n[alpha_index(0, k)] = "alpha_" + std::to_string(k);
    if (role_present(kind_, sites_, 0)) n[(p_ + 1)] = "beta_1";
    if (role_present(kind_, sites_, 1)) n[(p_ + 1) + (role_present(kind_, sites_, 0) ? 1 : 0)] = "beta_2";
    n[sigma_index(0)] = "sigma";
    n[mean_alpha_index(0)] = "mean_alpha";
    n[mean_beta_index(0)] = "mean_beta";
  } else {
    for (int j = 0; j < sites_; ++j) {
      std::string sj = std::to_string(j + 1);
      for (int k = 0; k <= p_; ++k)
        n[alpha_index(j, k)] = "alpha_" + std::to_string(k) + "_" + sj;
      for (int k : neighbors_[j])
        n[beta_index(j, k)] = "beta_" + std::to_string(k + 1) + "_" + sj;
      n[sigma_index(j)] = "sigma_" + sj;
      n[mean_alpha_index(j)] = "mean_alpha_" + sj;
      n[mean_beta_index(j)] = "mean_beta_" + sj;
    }
  }
  n[alpha_bar_index()] = "alpha_bar";
  n[beta_bar_index()] = "beta_bar";
  return n;
}

double ThetaState::gamma(int j) const { return std::exp(sigma(j)); }

}  // namespace betamrf
