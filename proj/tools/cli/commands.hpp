// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>

#include "cli/run_config.hpp"
#include "rsad/error.hpp"
#include "rsad/gradcheck.hpp"

namespace rsad::cli {

/// A self-check (gradient check) did not meet its tolerance.
class VerificationError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitDivergence = 4,
  kExitVerification = 5,
};

int exit_code_for(const std::exception& e);

/// Largest model cmd_gradcheck will finite-difference.
inline constexpr std::size_t kGradCheckMaxParams = 5000;
inline constexpr double kGradCheckTolerance = 1e-4;

/// Loads the series named by cfg.data (synthetic, CSV directory or Daphnet files).
SeriesSet load_series(const RunConfig& cfg);

void write_series_csv(const std::filesystem::path& dir, const SeriesSet& s);
SeriesSet read_series_csv(const std::filesystem::path& dir);

void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out, std::ostream& console);

struct TrainSummary {
  FitResult fit;
  std::filesystem::path checkpoint;
};
TrainSummary cmd_train(const RunConfig& cfg, const std::filesystem::path& out,
                       std::ostream& console);

struct DetectSummary {
  Metrics metrics;
  double threshold = 0.0;
  std::string threshold_source;
};
/// `threshold` set skips threshold selection.
DetectSummary cmd_detect(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                         std::optional<double> threshold, const std::filesystem::path& out,
                         std::ostream& console);

/// Throws VerificationError when any block exceeds kGradCheckTolerance.
GradCheckReport cmd_gradcheck(const RunConfig& cfg, const std::filesystem::path& out,
                              std::ostream& console, int corrupt_block = -1);

/// Model used by `gradcheck` when no config file is given.
ModelConfig gradcheck_default_model();

}  // namespace rsad::cli
