// Microbenchmarks for the hot paths: pseudo-likelihood evaluation, the inner
// auxiliary Gibbs sweep, a full double-MH iteration, smoothing-spline fits,
// and risk-neutral density extraction.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include <betamrf/mcmc.hpp>
#include <betamrf/model.hpp>
#include <betamrf/rng.hpp>
#include <betamrf/smile.hpp>
#include <betamrf/types.hpp>

namespace {

using namespace betamrf;

struct Fixture {
  NeighborhoodSystem nbhd;
  ThetaLayout layout;
  ThetaState truth;
  PitPanel panel;

  Fixture(int sites, int rows)
      : nbhd(NeighborhoodSystem::Kind::Markov, sites),
        layout(ThetaLayout::make(nbhd, 1, false)),
        truth(layout),
        panel([&] {
          for (int j = 0; j < sites; ++j) {
            truth[layout.alpha_index(j, 0)] = 0.1;
            truth[layout.alpha_index(j, 1)] = 0.4;
            truth[layout.sigma_index(j)] = std::log(5.0);
            for (int k : layout.site_neighbors(j)) truth[layout.beta_index(j, k)] = 0.15;
          }
          Rng rng(12345);
          return simulate_mrf_panel(truth, nbhd, rows, rng);
        }()) {}
};

void bm_pseudo_log_likelihood(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(pseudo_log_likelihood(fx.truth, fx.panel, fx.nbhd));
  }
  state.SetItemsProcessed(state.iterations() * fx.panel.rows() * fx.panel.cols());
}
BENCHMARK(bm_pseudo_log_likelihood)->Args({3, 500})->Args({9, 500})->Args({3, 2000});

void bm_gibbs_sweep_auxiliary(benchmark::State& state) {
  Fixture fx(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  AuxiliaryField field = fx.panel;
  Rng rng(7);
  for (auto _ : state) {
    gibbs_sweep_auxiliary(field, fx.truth, fx.nbhd, rng);
    benchmark::DoNotOptimize(field);
  }
  state.SetItemsProcessed(state.iterations() * fx.panel.rows() * fx.panel.cols());
}
BENCHMARK(bm_gibbs_sweep_auxiliary)->Args({3, 500})->Args({9, 500})->Args({3, 2000});

void bm_double_mh_step(benchmark::State& state) {
  Fixture fx(3, 500);
  HyperParams hyper;
  SamplerConfig config;
  config.inner_sweeps = static_cast<int>(state.range(0));
  std::vector<double> scale = default_proposal_scale(fx.layout);
  ThetaState theta = fx.truth;
  double cur = unnormalized_log_posterior(theta, fx.panel, fx.nbhd, hyper);
  Rng rng(11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        double_mh_step(theta, cur, fx.panel, fx.nbhd, hyper, config, scale, rng));
  }
}
BENCHMARK(bm_double_mh_step)->Arg(1)->Arg(5)->Arg(20);

SmileQuote make_quote(int n_points) {
  SmileQuote q;
  q.date = "2024-01-02";
  q.tenor = 0.25;
  q.spot = 100.0;
  q.rate = 0.05;
  q.forward = q.spot * std::exp(q.rate * q.tenor);
  for (int i = 0; i < n_points; ++i) {
    const double delta = 0.05 + 0.90 * i / (n_points - 1);
    const double sigma = 0.20 + 0.05 * (delta - 0.5) * (delta - 0.5);
    q.points.push_back({delta, sigma});
  }
  return q;
}

void bm_fit_smile_spline(benchmark::State& state) {
  const SmileQuote q = make_quote(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_smile_spline(q, 0.99));
  }
}
BENCHMARK(bm_fit_smile_spline)->Arg(5)->Arg(15)->Arg(50);

void bm_extract_rnd(benchmark::State& state) {
  const SmileQuote q = make_quote(15);
  const SplineFit fit = fit_smile_spline(q, 0.99);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_rnd(fit, q, static_cast<int>(state.range(0))));
  }
}
BENCHMARK(bm_extract_rnd)->Arg(200)->Arg(500)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
