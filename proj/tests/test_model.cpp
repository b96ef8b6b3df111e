#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "betamrf/model.hpp"
#include "betamrf/rng.hpp"
#include "betamrf/special.hpp"
#include "betamrf/types.hpp"
#include "test_util.hpp"

using namespace betamrf;
using testutil::integrate_unit_density;
using testutil::make_panel;

namespace {

ThetaLayout layout_for(NeighborhoodSystem::Kind kind, int sites, int p, bool pooled = false) {
  NeighborhoodSystem nbhd(kind, sites);
  return ThetaLayout::make(nbhd, p, pooled);
}

}  // namespace

TEST_CASE("maturity grid lookahead in trading days") {
  MaturityGrid grid({0.25, 0.5, 1.0});
  CHECK(grid.sites() == 3);
  CHECK(grid.lookahead_days(0) == 63);
  CHECK(grid.lookahead_days(1) == 126);
  CHECK(grid.lookahead_days(2) == 252);
  CHECK(grid.max_lookahead_days() == 252);
  CHECK_THROWS_AS(MaturityGrid({0.5, 0.25}), std::invalid_argument);
  CHECK_THROWS_AS(MaturityGrid({-0.25}), std::invalid_argument);
}

TEST_CASE("pit panel clamps into the open unit interval") {
  PitPanel panel = make_panel(2, 2, {0.0, 1.0, 0.3, 0.7});
  CHECK(panel.at(0, 0) == doctest::Approx(PitPanel::kClamp));
  CHECK(panel.at(0, 1) == doctest::Approx(1.0 - PitPanel::kClamp));
  CHECK(panel.at(1, 0) == 0.3);
  CHECK(panel.at(1, 1) == 0.7);
}

TEST_CASE("neighborhood systems expose neighbors and dependents") {
  NeighborhoodSystem ind(NeighborhoodSystem::Kind::Independent, 3);
  NeighborhoodSystem markov(NeighborhoodSystem::Kind::Markov, 3);
  NeighborhoodSystem prox(NeighborhoodSystem::Kind::Proximity, 3);

  for (int j = 0; j < 3; ++j) CHECK(ind.neighbors(j).empty());
  CHECK(markov.neighbors(0).empty());
  CHECK(markov.neighbors(1) == std::vector<int>{0});
  CHECK(markov.neighbors(2) == std::vector<int>{1});
  CHECK(markov.dependents(0) == std::vector<int>{1});
  CHECK(markov.dependents(2).empty());
  CHECK(prox.neighbors(0) == std::vector<int>{1});
  CHECK(prox.neighbors(1) == std::vector<int>{0, 2});
  // Proximity adjacency is symmetric: dependents coincide with neighbors.
  for (int j = 0; j < 3; ++j) CHECK(prox.dependents(j) == prox.neighbors(j));
}

TEST_CASE("theta layout dimension is (p+4)M + m + 2 in hierarchical mode") {
  // Markov chain over 3 sites: m = 0 + 1 + 1 = 2.
  ThetaLayout markov = layout_for(NeighborhoodSystem::Kind::Markov, 3, 1);
  CHECK(markov.dim() == (1 + 4) * 3 + 2 + 2);
  // Proximity over 3 sites: m = 1 + 2 + 1 = 4.
  ThetaLayout prox = layout_for(NeighborhoodSystem::Kind::Proximity, 3, 2);
  CHECK(prox.dim() == (2 + 4) * 3 + 4 + 2);
  // Independent: m = 0.
  ThetaLayout ind = layout_for(NeighborhoodSystem::Kind::Independent, 3, 0);
  CHECK(ind.dim() == 4 * 3 + 2);
  CHECK(static_cast<int>(markov.names().size()) == markov.dim());
}

TEST_CASE("logistic link closed forms") {
  CHECK(logistic_link(0.0) == doctest::Approx(0.5));
  CHECK(logistic_link(std::log(3.0)) == doctest::Approx(0.75));
  CHECK(logistic_link(-std::log(3.0)) == doctest::Approx(0.25));
  // Saturation stays strictly inside (0,1).
  CHECK(logistic_link(1e6) < 1.0);
  CHECK(logistic_link(-1e6) > 0.0);
}

TEST_CASE("compute_mu closed forms") {
  NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Independent, 1);
  ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
  ThetaState theta(layout);
  PitPanel panel = make_panel(3, 1, {0.3, 0.4, 0.5});

  CHECK(compute_mu(theta, panel, nbhd, 0, 1) == doctest::Approx(0.5));

  theta.v[layout.alpha_index(0, 0)] = std::log(3.0);
  CHECK(compute_mu(theta, panel, nbhd, 0, 1) == doctest::Approx(0.75));

  theta.v[layout.alpha_index(0, 0)] = 0.0;
  theta.v[layout.alpha_index(0, 1)] = 1.0;
  CHECK(compute_mu(theta, panel, nbhd, 0, 1) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-0.3))).epsilon(1e-9));
  CHECK(compute_mu(theta, panel, nbhd, 0, 1) == doctest::Approx(0.574443).epsilon(1e-5));

  CHECK_THROWS_AS(compute_mu(theta, panel, nbhd, 0, 0), std::out_of_range);
}

TEST_CASE("log_beta_local closed forms and normalization") {
  CHECK(log_beta_local(0.7, BetaLocalParams{0.5, 2.0}) == doctest::Approx(0.0));
  CHECK(log_beta_local(0.5, BetaLocalParams{0.5, 4.0}) ==
        doctest::Approx(std::log(1.5)).epsilon(1e-9));
  CHECK_THROWS_AS(log_beta_local(0.0, BetaLocalParams{0.5, 2.0}), std::domain_error);
  CHECK_THROWS_AS(log_beta_local(1.0, BetaLocalParams{0.5, 2.0}), std::domain_error);

  for (auto [mu, gamma] : std::vector<std::pair<double, double>>{
           {0.5, 2.0}, {0.5, 4.0}, {0.5, 0.9}, {0.9, 5.0}, {0.02, 150.0}, {0.3, 17.0}}) {
    BetaLocalParams params{mu, gamma};
    const double mass = integrate_unit_density(
        [&params](double y) { return std::exp(log_beta_local(y, params)); }, 60.0, 20000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("pseudo_log_likelihood closed forms and re-summation oracle") {
  SUBCASE("all locals uniform") {
    NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Markov, 2);
    ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
    ThetaState theta(layout);
    for (int j = 0; j < 2; ++j) theta.v[layout.sigma_index(j)] = std::log(2.0);
    PitPanel panel = make_panel(4, 2, {0.1, 0.9, 0.4, 0.6, 0.3, 0.8, 0.2, 0.7});
    CHECK(pseudo_log_likelihood(theta, panel, nbhd) == doctest::Approx(0.0));
  }

  SUBCASE("M=1 p=0 closed form") {
    NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Independent, 1);
    ThetaLayout layout = ThetaLayout::make(nbhd, 0, false);
    ThetaState theta(layout);
    theta.v[layout.sigma_index(0)] = std::log(4.0);
    PitPanel panel = make_panel(3, 1, {0.5, 0.5, 0.5});
    CHECK(pseudo_log_likelihood(theta, panel, nbhd) ==
          doctest::Approx(3.0 * std::log(1.5)).epsilon(1e-9));
  }

  SUBCASE("matches brute-force per-term sum") {
    NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Proximity, 3);
    ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
    ThetaState theta(layout);
    Rng rng(11);
    for (double& v : theta.v) v = 0.4 * rng.normal();
    PitPanel panel = make_panel(0, 3, {});
    {
      std::vector<double> vals;
      for (int i = 0; i < 15; ++i) vals.push_back(0.05 + 0.06 * i);
      panel = make_panel(5, 3, vals);
    }
    double brute = 0.0;
    for (int t = 1; t < 5; ++t) {
      for (int j = 0; j < 3; ++j) {
        brute += log_beta_local(panel.at(t, j),
                                BetaLocalParams{compute_mu(theta, panel, nbhd, j, t),
                                                theta.gamma(j)});
      }
    }
    CHECK(pseudo_log_likelihood(theta, panel, nbhd) == doctest::Approx(brute).epsilon(1e-12));
  }

  SUBCASE("dimension mismatch is rejected") {
    NeighborhoodSystem nbhd2(NeighborhoodSystem::Kind::Markov, 2);
    NeighborhoodSystem nbhd3(NeighborhoodSystem::Kind::Markov, 3);
    ThetaState theta(ThetaLayout::make(nbhd3, 1, false));
    PitPanel panel = make_panel(4, 2, std::vector<double>(8, 0.5));
    CHECK_THROWS_AS(pseudo_log_likelihood(theta, panel, nbhd2), std::invalid_argument);
  }
}

TEST_CASE("markov pseudo-likelihood equals the sequential factorization") {
  // With a directed chain topology the product of local conditionals is the
  // exact joint density (Z_t = 1), evaluated here term by term over both the
  // time and site ordering of the factorization.
  NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Markov, 3);
  ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
  ThetaState theta(layout);
  Rng rng(5);
  for (double& v : theta.v) v = 0.3 * rng.normal();
  std::vector<double> vals;
  for (int i = 0; i < 15; ++i) vals.push_back(rng.uniform());
  PitPanel panel = make_panel(5, 3, vals);

  double joint = 0.0;
  for (int t = 1; t < 5; ++t) {
    for (int j = 0; j < 3; ++j) {
      joint += log_beta_local(panel.at(t, j),
                              BetaLocalParams{compute_mu(theta, panel, nbhd, j, t),
                                              theta.gamma(j)});
    }
  }
  CHECK(pseudo_log_likelihood(theta, panel, nbhd) == doctest::Approx(joint).epsilon(1e-12));
}

TEST_CASE("log_prior closed-form behavior") {
  NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Markov, 2);
  ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
  HyperParams hyper;

  ThetaState at_mean(layout);
  const double sigma0 = std::log(hyper.xi1 / hyper.xi2);
  for (int j = 0; j < 2; ++j) at_mean.v[layout.sigma_index(j)] = sigma0;

  SUBCASE("gaussian kernels peak at the prior mean") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
      ThetaState perturbed = at_mean;
      for (double& v : perturbed.v) v += 0.5 * rng.normal();
      for (int j = 0; j < 2; ++j) perturbed.v[layout.sigma_index(j)] = sigma0;
      CHECK(log_prior(perturbed, hyper) <= log_prior(at_mean, hyper) + 1e-12);
    }
  }

  SUBCASE("perturbing alpha_bar changes the value by the gaussian kernel") {
    const double delta = 0.7;
    ThetaState shifted = at_mean;
    shifted.v[layout.alpha_bar_index()] += delta;
    // alpha_bar enters its own prior and the two mean_alpha_j kernels.
    const double expected = -delta * delta / (2.0 * hyper.s0_sq) -
                            2.0 * delta * delta / (2.0 * hyper.s_sq);
    CHECK(log_prior(shifted, hyper) - log_prior(at_mean, hyper) ==
          doctest::Approx(expected).epsilon(1e-10));
  }

  SUBCASE("matches an independent term-by-term re-evaluation") {
    Rng rng(17);
    ThetaState theta(layout);
    for (double& v : theta.v) v = 0.8 * rng.normal();

    auto ln = [](double x, double mean, double var) {
      const double d = x - mean;
      return -0.5 * std::log(2.0 * M_PI * var) - 0.5 * d * d / var;
    };
    double oracle = ln(theta.alpha_bar(), hyper.a, hyper.s0_sq) +
                    ln(theta.beta_bar(), hyper.b, hyper.g0_sq);
    for (int j = 0; j < 2; ++j) {
      oracle += ln(theta.mean_alpha(j), theta.alpha_bar(), hyper.s_sq);
      oracle += ln(theta.mean_beta(j), theta.beta_bar(), hyper.g_sq);
      for (int k = 0; k <= 1; ++k) oracle += ln(theta.alpha(j, k), theta.mean_alpha(j), hyper.s_j_sq);
      const double g = theta.gamma(j);
      // Ga(xi1, xi2) density at gamma_j times the Jacobian gamma_j of the
      // sigma = log gamma change of variables.
      oracle += hyper.xi1 * std::log(hyper.xi2) - std::lgamma(hyper.xi1) +
                (hyper.xi1 - 1.0) * std::log(g) - hyper.xi2 * g + std::log(g);
    }
    oracle += ln(theta.beta(1, 0), theta.mean_beta(1), hyper.g_j_sq);
    CHECK(log_prior(theta, hyper) == doctest::Approx(oracle).epsilon(1e-12));
  }

  SUBCASE("concave in each gaussian coordinate") {
    Rng rng(23);
    ThetaState theta(layout);
    for (double& v : theta.v) v = 0.8 * rng.normal();
    const double h = 1e-3;
    for (int i = 0; i < layout.dim(); ++i) {
      if (layout.is_sigma_coord(i)) continue;
      ThetaState up = theta, down = theta;
      up.v[i] += h;
      down.v[i] -= h;
      const double second =
          (log_prior(up, hyper) - 2.0 * log_prior(theta, hyper) + log_prior(down, hyper)) / (h * h);
      CHECK(second <= 1e-6);
    }
  }
}

TEST_CASE("unnormalized_log_posterior is likelihood plus prior") {
  NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Markov, 2);
  ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
  HyperParams hyper;
  ThetaState theta(layout);
  Rng rng(29);
  for (double& v : theta.v) v = 0.4 * rng.normal();
  std::vector<double> vals;
  for (int i = 0; i < 12; ++i) vals.push_back(rng.uniform());
  PitPanel panel = make_panel(6, 2, vals);
  CHECK(unnormalized_log_posterior(theta, panel, nbhd, hyper) ==
        doctest::Approx(pseudo_log_likelihood(theta, panel, nbhd) + log_prior(theta, hyper))
            .epsilon(1e-12));
}

TEST_CASE("flat-prior limit reduces the posterior to the likelihood") {
  NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Independent, 1);
  ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
  HyperParams wide;
  wide.s0_sq = wide.g0_sq = wide.s_sq = wide.g_sq = wide.s_j_sq = wide.g_j_sq = 1e12;
  PitPanel panel = make_panel(4, 1, {0.2, 0.4, 0.6, 0.8});

  ThetaState a(layout), b(layout);
  a.v[layout.alpha_index(0, 1)] = 0.5;
  b.v[layout.alpha_index(0, 1)] = -0.5;
  // With essentially flat gaussian priors and identical sigma, posterior
  // differences equal likelihood differences.
  const double post_diff = unnormalized_log_posterior(a, panel, nbhd, wide) -
                           unnormalized_log_posterior(b, panel, nbhd, wide);
  const double lik_diff =
      pseudo_log_likelihood(a, panel, nbhd) - pseudo_log_likelihood(b, panel, nbhd);
  CHECK(post_diff == doctest::Approx(lik_diff).epsilon(1e-6));
}

TEST_CASE("two-site proximity relabeling symmetry") {
  NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Proximity, 2);
  ThetaLayout layout = ThetaLayout::make(nbhd, 1, false);
  ThetaState theta(layout);
  Rng rng(31);
  for (double& v : theta.v) v = 0.5 * rng.normal();

  // Swap sites 0 and 1 in both theta and the panel.
  ThetaState swapped(layout);
  swapped.v[layout.alpha_bar_index()] = theta.alpha_bar();
  swapped.v[layout.beta_bar_index()] = theta.beta_bar();
  for (int j = 0; j < 2; ++j) {
    const int sj = 1 - j;
    for (int k = 0; k <= 1; ++k) swapped.v[layout.alpha_index(sj, k)] = theta.alpha(j, k);
    swapped.v[layout.beta_index(sj, 1 - sj)] = theta.beta(j, 1 - j);
    swapped.v[layout.sigma_index(sj)] = theta.sigma(j);
    swapped.v[layout.mean_alpha_index(sj)] = theta.mean_alpha(j);
    swapped.v[layout.mean_beta_index(sj)] = theta.mean_beta(j);
  }

  std::vector<double> vals, vals_swapped;
  for (int t = 0; t < 5; ++t) {
    const double y0 = rng.uniform(), y1 = rng.uniform();
    vals.push_back(y0);
    vals.push_back(y1);
    vals_swapped.push_back(y1);
    vals_swapped.push_back(y0);
  }
  PitPanel panel = make_panel(5, 2, vals);
  PitPanel panel_swapped = make_panel(5, 2, vals_swapped);
  CHECK(pseudo_log_likelihood(theta, panel, nbhd) ==
        doctest::Approx(pseudo_log_likelihood(swapped, panel_swapped, nbhd)).epsilon(1e-12));
}

TEST_CASE("pooled mode shares coefficients across sites") {
  NeighborhoodSystem nbhd(NeighborhoodSystem::Kind::Markov, 3);
  ThetaLayout pooled = ThetaLayout::make(nbhd, 1, true);
  ThetaState theta(pooled);
  theta.v[pooled.alpha_index(0, 0)] = 0.2;
  theta.v[pooled.alpha_index(0, 1)] = 0.4;
  // Every site reads the same shared block.
  for (int j = 0; j < 3; ++j) {
    CHECK(theta.alpha(j, 0) == 0.2);
    CHECK(theta.alpha(j, 1) == 0.4);
  }
  CHECK(theta.beta(1, 0) == theta.beta(2, 1));  // both are the predecessor role

  // With one site, pooled and hierarchical compute_mu agree.
  NeighborhoodSystem single(NeighborhoodSystem::Kind::Independent, 1);
  ThetaLayout lp = ThetaLayout::make(single, 1, true);
  ThetaLayout lh = ThetaLayout::make(single, 1, false);
  ThetaState tp(lp), th(lh);
  tp.v[lp.alpha_index(0, 0)] = th.v[lh.alpha_index(0, 0)] = 0.3;
  tp.v[lp.alpha_index(0, 1)] = th.v[lh.alpha_index(0, 1)] = -0.6;
  PitPanel panel = make_panel(3, 1, {0.4, 0.5, 0.6});
  CHECK(compute_mu(tp, panel, single, 0, 2) ==
        doctest::Approx(compute_mu(th, panel, single, 0, 2)).epsilon(1e-15));
}

TEST_CASE("simulate_mrf_panel rejects proximity and produces valid panels") {
  NeighborhoodSystem prox(NeighborhoodSystem::Kind::Proximity, 2);
  ThetaState tprox(ThetaLayout::make(prox, 1, false));
  Rng rng(7);
  CHECK_THROWS_AS(simulate_mrf_panel(tprox, prox, 10, rng), std::invalid_argument);

  NeighborhoodSystem markov(NeighborhoodSystem::Kind::Markov, 2);
  ThetaLayout layout = ThetaLayout::make(markov, 1, false);
  ThetaState theta(layout);
  theta.v[layout.sigma_index(0)] = std::log(3.0);
  theta.v[layout.sigma_index(1)] = std::log(3.0);
  PitPanel panel = simulate_mrf_panel(theta, markov, 50, rng);
  CHECK(panel.rows() == 50);
  CHECK(panel.cols() == 2);
  for (int t = 0; t < 50; ++t) {
    for (int j = 0; j < 2; ++j) {
      CHECK(panel.at(t, j) > 0.0);
      CHECK(panel.at(t, j) < 1.0);
    }
  }
}

TEST_CASE("special function sanity") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5));
  CHECK(norm_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-8));
  CHECK(norm_cdf_inv(0.975) == doctest::Approx(1.959963985).epsilon(1e-8));
  for (double u : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9}) {
    CHECK(norm_cdf(norm_cdf_inv(u)) == doctest::Approx(u).epsilon(1e-10));
  }
  // Regularized incomplete beta against closed forms.
  CHECK(reg_inc_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(reg_inc_beta(2.0, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(reg_inc_beta(2.0, 1.0, 0.4) == doctest::Approx(0.16).epsilon(1e-12));
}
