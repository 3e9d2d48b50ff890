// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rsad/data.hpp"
#include "rsad/model.hpp"
#include "rsad/objective.hpp"

namespace rsad {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 10;  ///< 0 disables early stopping
  double clip_norm = 5.0;     ///< 0 disables clipping

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;   ///< 1-based
  LossBreakdown train;     ///< mean over the epoch's training windows
  LossBreakdown val;       ///< mean over validation windows (zero if none)
};

struct FitResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;  ///< 0 when no epoch improved on the initial parameters
  bool stopped_early = false;
};

/// Adaptive-moment optimizer over every block of a ModelParams.
class Adam {
 public:
  Adam(const ModelParams& like, const TrainConfig& config);

  void step(ModelParams& params, const ModelParams& grad);
  std::size_t steps_taken() const { return t_; }

 private:
  ModelParams m_;
  ModelParams v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

/// Mean per-window breakdown of the objective over `windows`.
LossBreakdown evaluate_loss(const ModelParams& params, std::span<const WindowSample> windows,
                            const LossWeights& weights);

/// Mean per-window gradient and loss over a batch.
LossAndGradient batch_gradient(const ModelParams& params, std::span<const WindowSample> batch,
                               const LossWeights& weights);

/// Scales `grad` so its global L2 norm is at most `max_norm`; returns the pre-clip norm.
double clip_global_norm(ModelParams& grad, double max_norm);

/// Called after every epoch; useful for progress logging.
using EpochCallback = std::function<void(const EpochRecord&)>;

FitResult fit(ModelParams model, std::span<const WindowSample> train,
              std::span<const WindowSample> val, const LossWeights& weights,
              const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace rsad
