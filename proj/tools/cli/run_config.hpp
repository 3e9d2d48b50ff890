// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "rsad/data.hpp"
#include "rsad/detection.hpp"
#include "rsad/model.hpp"
#include "rsad/objective.hpp"
#include "rsad/training.hpp"

namespace rsad::cli {

enum class DataSource { kSynth, kSeries, kDaphnet };

std::string to_string(DataSource s);

struct DataConfig {
  DataSource source = DataSource::kSynth;
  std::filesystem::path series_dir;                 ///< output of `rsad synth`
  std::vector<std::filesystem::path> daphnet_files;
  std::size_t decimation = 1;
  std::size_t train_stride = 8;
  std::size_t eval_stride = 1;
  SplitRatios split;
  ThresholdPolicy threshold;
  ScalarMode score_mode = ScalarMode::kWeightedSum;
};

/// Anomalies placed by plan_anomalies; folded into SynthSpec::anomalies when
/// the config is resolved.
struct AnomalyPlan {
  std::size_t count = 0;
  std::size_t length = 40;
  std::size_t begin = 0;
  std::size_t end = 0;  ///< 0 means the series length
};

struct RunConfig {
  std::uint64_t seed = 42;
  ModelConfig model;
  LossWeights weights;
  TrainConfig train;
  DataConfig data;
  SynthSpec synth;
  AnomalyPlan plan;

  /// Throws ConfigError on the first invalid value.
  void validate() const;
  /// Applies the seed everywhere and materializes planned anomalies.
  void resolve();
};

/// INI text with [run], [model], [loss], [train], [data], [synth] sections.
/// Unknown sections or keys are rejected; missing keys keep their defaults.
RunConfig parse_config(std::istream& in, const std::string& source);
RunConfig load_config(const std::filesystem::path& path);

/// Every field written out, so the file alone reproduces the run.
void write_config(std::ostream& out, const RunConfig& cfg);

}  // namespace rsad::cli
