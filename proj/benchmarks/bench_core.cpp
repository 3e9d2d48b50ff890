// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "rsad/model.hpp"
#include "rsad/numerics.hpp"

namespace {

rsad::Mat random_mat(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  rsad::Mat m(rows, cols);
  for (double& v : m.values()) v = n(rng);
  return m;
}

rsad::ModelConfig config_for(std::size_t w, std::size_t d) {
  rsad::ModelConfig c;
  c.m = 9;
  c.w = w;
  c.h = 8;
  c.d = d;
  c.mlp_hidden = {64};
  return c;
}

void BM_MatMul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const rsad::Mat a = random_mat(4 * n, 2 * n, 1);
  const rsad::Mat b = random_mat(2 * n, 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(rsad::mat_mul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(8 * n * n));
}
BENCHMARK(BM_MatMul)->Arg(16)->Arg(32)->Arg(64);

void BM_ForwardFull(benchmark::State& state) {
  const auto c = config_for(static_cast<std::size_t>(state.range(0)), 32);
  const rsad::ModelParams p = rsad::ModelParams::initialize(c, 3);
  const rsad::Mat x = random_mat(c.m, c.w, 4);
  for (auto _ : state) benchmark::DoNotOptimize(rsad::forward_full(p, x));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ForwardFull)->Arg(32)->Arg(64);

void BM_LossAndGradient(benchmark::State& state) {
  const auto c = config_for(static_cast<std::size_t>(state.range(0)), 32);
  const rsad::ModelParams p = rsad::ModelParams::initialize(c, 3);
  const rsad::Mat x = random_mat(c.m, c.w, 4);
  const rsad::Mat x_f = random_mat(c.m, c.h, 5);
  for (auto _ : state) benchmark::DoNotOptimize(rsad::loss_and_gradient(p, x, x_f, {}));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_LossAndGradient)->Arg(32)->Arg(64);

void BM_BackwardFull(benchmark::State& state) {
  const auto c = config_for(static_cast<std::size_t>(state.range(0)), 32);
  const rsad::ModelParams p = rsad::ModelParams::initialize(c, 3);
  const rsad::ForwardCache cache = rsad::forward_cached(p, random_mat(c.m, c.w, 4));
  const rsad::Mat x_f = random_mat(c.m, c.h, 5);
  for (auto _ : state) benchmark::DoNotOptimize(rsad::backward_full(p, cache, x_f, {}));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BackwardFull)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
