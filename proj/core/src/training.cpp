// SPDX-License-Identifier: Apache-2.0
#include "rsad/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rsad/error.hpp"
#include "rsad/numerics.hpp"

namespace rsad {

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("training: learning_rate must be finite and >= 0");
  }
  if (batch_size == 0) throw ConfigError("training: batch_size must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("training: moment decays must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("training: epsilon must be positive");
  if (!(clip_norm >= 0.0)) throw ConfigError("training: clip_norm must be >= 0");
}

Adam::Adam(const ModelParams& like, const TrainConfig& config)
    : m_(ModelParams::zeros(like.config)),
      v_(ModelParams::zeros(like.config)),
      lr_(config.learning_rate),
      beta1_(config.beta1),
      beta2_(config.beta2),
      eps_(config.epsilon) {}

void Adam::step(ModelParams& params, const ModelParams& grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto p = params.blocks();
  const auto g = grad.blocks();
  auto m = m_.blocks();
  auto v = v_.blocks();
  for (std::size_t b = 0; b < p.size(); ++b) {
    Mat& pb = *p[b].second;
    const Mat& gb = *g[b].second;
    Mat& mb = *m[b].second;
    Mat& vb = *v[b].second;
    for (std::size_t i = 0; i < pb.size(); ++i) {
      mb[i] = beta1_ * mb[i] + (1.0 - beta1_) * gb[i];
      vb[i] = beta2_ * vb[i] + (1.0 - beta2_) * gb[i] * gb[i];
      pb[i] -= lr_ * (mb[i] / c1) / (std::sqrt(vb[i] / c2) + eps_);
    }
  }
}

LossBreakdown evaluate_loss(const ModelParams& params, std::span<const WindowSample> windows,
                            const LossWeights& weights) {
  LossBreakdown sum;
  if (windows.empty()) return sum;
  for (const WindowSample& ws : windows) {
    const ForwardResult f = forward_full(params, ws.x);
    sum += loss(ws.x, f.x_r, ws.x_f, f.x_f_hat1, f.x_f_hat2, weights);
  }
  sum *= 1.0 / static_cast<double>(windows.size());
  return sum;
}

namespace {

void accumulate(ModelParams& acc, const ModelParams& g) {
  auto a = acc.blocks();
  const auto b = g.blocks();
  for (std::size_t i = 0; i < a.size(); ++i) *a[i].second += *b[i].second;
}

void scale_all(ModelParams& p, double c) {
  for (auto& [name, m] : p.blocks()) *m *= c;
}

}  // namespace

LossAndGradient batch_gradient(const ModelParams& params, std::span<const WindowSample> batch,
                               const LossWeights& weights) {
  LossAndGradient out{{}, ModelParams::zeros(params.config)};
  if (batch.empty()) return out;
  for (const WindowSample& ws : batch) {
    LossAndGradient one = loss_and_gradient(params, ws.x, ws.x_f, weights);
    out.loss += one.loss;
    accumulate(out.grad, one.grad);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  scale_all(out.grad, inv);
  return out;
}

double clip_global_norm(ModelParams& grad, double max_norm) {
  double ss = 0.0;
  for (const auto& [name, m] : grad.blocks()) ss += squared_norm(*m);
  const double norm = std::sqrt(ss);
  if (max_norm > 0.0 && norm > max_norm) scale_all(grad, max_norm / norm);
  return norm;
}

FitResult fit(ModelParams model, std::span<const WindowSample> train,
              std::span<const WindowSample> val, const LossWeights& weights,
              const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  weights.validate();
  if (train.empty()) throw DataError("fit: empty training set");

  FitResult result;
  Adam optimizer(model, config);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  ModelParams best = model;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::vector<WindowSample> batch;
      batch.reserve(stop - start);
      for (std::size_t k = start; k < stop; ++k) batch.push_back(train[order[k]]);

      LossAndGradient step;
      try {
        step = batch_gradient(model, batch, weights);
      } catch (const DivergenceError& e) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) + ", batch " +
                              std::to_string(batch_index) + ": " + e.what());
      }
      LossBreakdown contribution = step.loss;
      contribution *= static_cast<double>(batch.size());
      rec.train += contribution;
      clip_global_norm(step.grad, config.clip_norm);
      optimizer.step(model, step.grad);
    }
    rec.train *= 1.0 / static_cast<double>(train.size());

    if (!val.empty()) {
      rec.val = evaluate_loss(model, val, weights);
      if (!std::isfinite(rec.val.total)) {
        throw DivergenceError("validation loss diverged at epoch " + std::to_string(epoch));
      }
      if (rec.val.total < best_val) {
        best_val = rec.val.total;
        best = model;
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (!val.empty() && config.patience > 0 && since_best >= config.patience) {
      result.stopped_early = true;
      break;
    }
  }

  if (val.empty()) {
    result.best_epoch = result.history.empty() ? 0 : result.history.back().epoch;
    result.params = std::move(model);
  } else {
    result.params = result.best_epoch == 0 ? std::move(model) : std::move(best);
  }
  return result;
}

}  // namespace rsad
