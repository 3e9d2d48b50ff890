// SPDX-License-Identifier: Apache-2.0
#include "rsad/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rsad/numerics.hpp"

namespace rsad {

GradCheckReport check_gradients(const ModelParams& params, const Mat& x, const Mat& x_f,
                                const LossWeights& weights, double h, int corrupt_block) {
  const ModelParams analytic = loss_and_gradient(params, x, x_f, weights).grad;
  ModelParams probe = params;
  auto probe_blocks = probe.blocks();
  const auto grad_blocks = analytic.blocks();

  GradCheckReport report;
  for (std::size_t b = 0; b < probe_blocks.size(); ++b) {
    Mat& target = *probe_blocks[b].second;
    const Mat saved = target;
    const ScalarFn objective = [&](const Mat& values) {
      target = values;
      const ForwardResult f = forward_full(probe, x);
      return loss(x, f.x_r, x_f, f.x_f_hat1, f.x_f_hat2, weights).total;
    };
    const Mat numeric = finite_diff_grad(objective, saved, h);
    target = saved;

    Mat exact = *grad_blocks[b].second;
    if (static_cast<int>(b) == corrupt_block) exact *= 1.01;

    BlockGradError err{probe_blocks[b].first, 0.0, 0.0};
    for (std::size_t i = 0; i < exact.size(); ++i) {
      const double diff = std::abs(exact[i] - numeric[i]);
      const double scale = std::max({std::abs(exact[i]), std::abs(numeric[i]), kGradCheckFloor});
      err.max_abs_error = std::max(err.max_abs_error, diff);
      err.max_rel_error = std::max(err.max_rel_error, diff / scale);
    }
    report.max_rel_error = std::max(report.max_rel_error, err.max_rel_error);
    report.blocks.push_back(err);
  }
  return report;
}

GradCheckReport check_gradients_random(const ModelConfig& config, const LossWeights& weights,
                                       std::uint64_t seed, double h, int corrupt_block) {
  const ModelParams params = ModelParams::initialize(config, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat x(config.m, config.w);
  Mat x_f(config.m, config.h);
  for (double& v : x.values()) v = normal(rng);
  for (double& v : x_f.values()) v = normal(rng);
  return check_gradients(params, x, x_f, weights, h, corrupt_block);
}

}  // namespace rsad
