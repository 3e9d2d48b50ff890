// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>

#include "rsad/data.hpp"
#include "rsad/model.hpp"
#include "rsad/objective.hpp"

namespace rsad {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Everything needed to score new data with a trained model.
struct Checkpoint {
  ModelParams params;
  LossWeights weights;
  NormStats norm_stats;
};

/// Little-endian layout:
///   "RSAD" | u32 version
///   | u32 m, w, h, d | u32 n_hidden, u32 widths[n_hidden] | u8 reverse_decoder
///   | f64 alpha, beta, gamma
///   | u32 channels | f64 mean[channels] | f64 stddev[channels]
///   | u32 n_blocks | n_blocks x (u32 rows, u32 cols, f64 row-major payload)
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rsad
