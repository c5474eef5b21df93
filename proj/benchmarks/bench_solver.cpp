#include <benchmark/benchmark.h>

#include "ggmc/cv.hpp"
#include "ggmc/prox.hpp"
#include "ggmc/rng.hpp"
#include "ggmc/sim.hpp"

using namespace ggmc;

namespace {

SimDataset& anova_instance() {
  static SimDataset data = simulate_anova(4, 0.0, 2.0, 100, 1234);
  return data;
}

}  // namespace

static void BM_ProxGroupL2(benchmark::State& state) {
  const Index p = state.range(0);
  std::vector<GroupInfo> groups;
  for (Index j = 0; j < p / 4; ++j)
    groups.push_back({4 * j, 4, 2.0, "g"});
  CounterRng rng(1);
  Vector u(p);
  for (Index i = 0; i < p; ++i) u[i] = rng.normal();
  const auto th = GroupThresholds::scaled(groups, 0.5);
  for (auto _ : state) {
    Vector out = prox_group_l2(u, th, groups);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * p);
}
BENCHMARK(BM_ProxGroupL2)->Arg(32)->Arg(512)->Arg(4096);

static void BM_PdhgSolveMidLambda(benchmark::State& state) {
  auto& data = anova_instance();
  GmcConfig cfg;
  cfg.alpha = static_cast<double>(state.range(0)) / 10.0;
  cfg.lambda = 0.2 * lambda_max(data.design, data.response);
  for (auto _ : state) {
    auto res = pdhg_solve(data.design, data.response, cfg);
    benchmark::DoNotOptimize(res.beta);
  }
}
BENCHMARK(BM_PdhgSolveMidLambda)->Arg(0)->Arg(6)->Arg(10);

static void BM_SolutionPath(benchmark::State& state) {
  auto& data = anova_instance();
  GmcConfig cfg;
  cfg.alpha = 0.6;
  const auto grid = make_grid(data.design, data.response,
                              static_cast<int>(state.range(0)), 1e-2);
  for (auto _ : state) {
    auto path = solution_path(data.design, data.response, grid, cfg);
    benchmark::DoNotOptimize(path.coefficients);
  }
  state.SetItemsProcessed(state.iterations() * grid.values.size());
}
BENCHMARK(BM_SolutionPath)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

static void BM_CrossValidate(benchmark::State& state) {
  auto& data = anova_instance();
  GmcConfig cfg;
  cfg.alpha = 0.6;
  const auto grid = make_grid(data.design, data.response, 25, 1e-2);
  CvOptions opts;
  opts.threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto cv = cross_validate(data.design, data.response, 5, grid, cfg, 7, opts);
    benchmark::DoNotOptimize(cv.mean_error);
  }
}
BENCHMARK(BM_CrossValidate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_PenaltyEvaluation(benchmark::State& state) {
  auto& data = anova_instance();
  GmcConfig cfg;
  cfg.alpha = 0.6;
  cfg.lambda = 0.1;
  ProblemOps ops(data.design, cfg);
  CounterRng rng(3);
  Vector beta(data.design.p());
  for (Index i = 0; i < beta.size(); ++i) beta[i] = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(group_gmc_penalty(beta, ops));
  }
}
BENCHMARK(BM_PenaltyEvaluation);

BENCHMARK_MAIN();
