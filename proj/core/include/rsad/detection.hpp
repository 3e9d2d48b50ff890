// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rsad/data.hpp"
#include "rsad/model.hpp"
#include "rsad/objective.hpp"

namespace rsad {

/// Reconstruction and the two prediction residual norms of one window.
struct ScoreVector {
  double rec = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  std::size_t origin_index = 0;

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;
};

struct Metrics {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Needs the window's H future steps, so a score lags the data by H.
ScoreVector score_window(const ModelParams& params, const WindowSample& sample);
std::vector<ScoreVector> score_windows(const ModelParams& params,
                                       std::span<const WindowSample> windows);

enum class ScalarMode {
  kWeightedSum,  ///< α·rec + β·p1 + γ·p2
  kMax,          ///< max(α·rec, β·p1, γ·p2)
};

double scalarize(const ScoreVector& score, const LossWeights& weights,
                 ScalarMode mode = ScalarMode::kWeightedSum);
std::vector<double> scalarize(std::span<const ScoreVector> scores, const LossWeights& weights,
                              ScalarMode mode = ScalarMode::kWeightedSum);

struct ThresholdPolicy {
  enum class Kind { kBestF1, kPercentile };
  Kind kind = Kind::kBestF1;
  double percentile = 99.0;  ///< used by kPercentile
};

/// best_f1 tries -inf, every midpoint between consecutive distinct scores and
/// +inf, returning the lowest τ with maximal F1. percentile returns the p-th
/// percentile (linear interpolation) of the normal-labelled scores.
double select_threshold(std::span<const double> scores, const std::vector<bool>& labels,
                        const ThresholdPolicy& policy);

/// predicted[i] = scores[i] > tau.
std::vector<bool> classify(std::span<const double> scores, double tau);

Metrics evaluate(const std::vector<bool>& predicted, const std::vector<bool>& truth);
Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn);

struct SweepRow {
  double threshold = 0.0;
  Metrics metrics;
};

/// Metrics at every best_f1 candidate threshold, ascending.
std::vector<SweepRow> threshold_sweep(std::span<const double> scores,
                                      const std::vector<bool>& labels);

/// CSV with header origin_index,rec,p1,p2,scalar,label,predicted.
void write_scores_csv(std::ostream& out, std::span<const ScoreVector> scores,
                      std::span<const double> scalars, const std::vector<bool>& labels,
                      const std::vector<bool>& predicted);
/// key=value lines: threshold, tp, fp, fn, tn, precision, recall, f1.
void write_metrics(std::ostream& out, const Metrics& m, double threshold,
                   const std::string& threshold_source);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// Shortest round-trippable text for a double ("inf"/"-inf" for infinities).
std::string format_double(double v);

}  // namespace rsad
