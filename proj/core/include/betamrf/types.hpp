#pragma once

#include <string>
#include <vector>

namespace betamrf {

// Ordered term structure of maturities (year fractions).
struct MaturityGrid {
  std::vector<double> tenors;
  int trading_days_per_year = 252;

  MaturityGrid(std::vector<double> tenors_, int tdpy = 252);
  int sites() const { return static_cast<int>(tenors.size()); }
  int lookahead_days(int j) const;
  int max_lookahead_days() const;
};

// T x M panel of probability integral transforms, one column per maturity.
// Entries are clamped into the open unit interval at construction.
class PitPanel {
 public:
  static constexpr double kClamp = 1e-9;

  PitPanel(std::vector<std::string> dates, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int t, int j) const { return values_[static_cast<std::size_t>(t) * cols_ + j]; }
  void set(int t, int j, double y);
  const std::vector<std::string>& dates() const { return dates_; }
  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<std::string> dates_;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;  // row-major
};

// Site topology over the M maturities.
class NeighborhoodSystem {
 public:
  enum class Kind { Independent, Markov, Proximity };

  NeighborhoodSystem(Kind kind, int sites);

  Kind kind() const { return kind_; }
  int sites() const { return sites_; }
  // N(j): directed predecessor for Markov, both adjacent sites for Proximity.
  const std::vector<int>& neighbors(int j) const { return neighbors_[j]; }
  // Sites whose local density involves site j, i.e. { i : j in N(i) }.
  // Equals N(j) under Proximity; this is the symmetric closure used by the
  // auxiliary-field Gibbs sweeps.
  const std::vector<int>& dependents(int j) const { return dependents_[j]; }
  int degree(int j) const { return static_cast<int>(neighbors_[j].size()); }
  int total_degree() const;

  static Kind kind_from_string(const std::string& s);
  static std::string kind_to_string(Kind k);

 private:
  Kind kind_;
  int sites_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<std::vector<int>> dependents_;
};

// Hierarchical prior hyperparameters. Defaults follow the simulation-study
// settings; xi1/xi2 are weakly informative (prior mean 20 for the precision).
struct HyperParams {
  double a = 0.0;         // prior mean of alpha_bar
  double b = 0.0;         // prior mean of beta_bar
  double s0_sq = 100.0;   // var of alpha_bar
  double g0_sq = 100.0;   // var of beta_bar
  double s_sq = 100.0;    // var of alpha_j around alpha_bar
  double g_sq = 100.0;    // var of beta_j around beta_bar
  double s_j_sq = 10.0;   // var of alpha coefficients around alpha_j
  double g_j_sq = 10.0;   // var of beta coefficients around beta_j
  double xi1 = 2.0;       // gamma prior shape on gamma_j
  double xi2 = 0.1;       // gamma prior rate on gamma_j

  void validate() const;
};

// Mean/precision parameterization of a beta density.
struct BetaLocalParams {
  double mu;     // in (0,1)
  double gamma;  // > 0

  double shape1() const { return mu * gamma; }
  double shape2() const { return (1.0 - mu) * gamma; }
  void validate() const;
};

// Index map for the flat parameter vector theta. In the hierarchical case the
// per-site block is (alpha_0j..alpha_pj, beta_.j, sigma_j, mean_alpha_j,
// mean_beta_j) followed by the two global means, so dim = (p+4)M + m + 2.
// Pooled mode shares one coefficient block (and one sigma) across sites, with
// beta coefficients indexed by neighbor role (predecessor / successor).
class ThetaLayout {
 public:
  static ThetaLayout make(const NeighborhoodSystem& nbhd, int p, bool pooled);

  int sites() const { return sites_; }
  int p() const { return p_; }
  bool pooled() const { return pooled_; }
  int dim() const { return dim_; }
  NeighborhoodSystem::Kind kind() const { return kind_; }

  int alpha_index(int j, int k) const;          // k = 0..p
  int beta_index(int j, int neighbor_site) const;
  int sigma_index(int j) const;
  int mean_alpha_index(int j) const;
  int mean_beta_index(int j) const;
  int alpha_bar_index() const;
  int beta_bar_index() const;

  bool is_sigma_coord(int i) const;
  std::vector<std::string> names() const;
  const std::vector<int>& site_neighbors(int j) const { return neighbors_.at(j); }
  int pooled_roles() const { return pooled_roles_; }

 private:
  int sites_ = 0;
  int p_ = 0;
  bool pooled_ = false;
  NeighborhoodSystem::Kind kind_ = NeighborhoodSystem::Kind::Independent;
  std::vector<std::vector<int>> neighbors_;  // per-site N(j), ascending
  std::vector<int> site_offset_;             // hierarchical: start of site block
  int pooled_roles_ = 0;                     // pooled: size of shared beta block
  int dim_ = 0;
};

// Full parameter state: a flat vector addressed through its layout.
struct ThetaState {
  ThetaLayout layout;
  std::vector<double> v;

  explicit ThetaState(const ThetaLayout& l) : layout(l), v(l.dim(), 0.0) {}

  double alpha(int j, int k) const { return v[layout.alpha_index(j, k)]; }
  double beta(int j, int neighbor_site) const { return v[layout.beta_index(j, neighbor_site)]; }
  double sigma(int j) const { return v[layout.sigma_index(j)]; }
  double gamma(int j) const;
  double mean_alpha(int j) const { return v[layout.mean_alpha_index(j)]; }
  double mean_beta(int j) const { return v[layout.mean_beta_index(j)]; }
  double alpha_bar() const { return v[layout.alpha_bar_index()]; }
  double beta_bar() const { return v[layout.beta_bar_index()]; }

  double& operator[](int i) { return v[i]; }
  double operator[](int i) const { return v[i]; }
};

}  // namespace betamrf
