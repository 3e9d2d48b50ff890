// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rsad/model.hpp"
#include "rsad/objective.hpp"

namespace rsad {

struct BlockGradError {
  std::string name;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
};

struct GradCheckReport {
  std::vector<BlockGradError> blocks;
  double max_rel_error = 0.0;

  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// Entries whose analytic and numeric gradients are both below this magnitude
/// are compared against it instead, so round-off on near-zero entries does not
/// count as relative error.
inline constexpr double kGradCheckFloor = 1e-5;

/// Compares backward_full against central differences of the loss on every
/// parameter block. `corrupt_block` >= 0 perturbs that block's analytic
/// gradient by 1% (self-test hook).
GradCheckReport check_gradients(const ModelParams& params, const Mat& x, const Mat& x_f,
                                const LossWeights& weights, double h = 1e-5,
                                int corrupt_block = -1);

/// Builds a seeded model and random data of the given shape, then checks it.
GradCheckReport check_gradients_random(const ModelConfig& config, const LossWeights& weights,
                                       std::uint64_t seed, double h = 1e-5,
                                       int corrupt_block = -1);

}  // namespace rsad
