// SPDX-License-Identifier: Apache-2.0
#include "rsad/detection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

#include "rsad/error.hpp"
#include "rsad/numerics.hpp"

namespace rsad {

ScoreVector score_window(const ModelParams& params, const WindowSample& sample) {
  const ForwardResult f = forward_full(params, sample.x);
  if (!sample.x_f.same_shape(f.x_f_hat1)) {
    throw ShapeError("score_window: target " + sample.x_f.shape_str() +
                     " does not match prediction " + f.x_f_hat1.shape_str());
  }
  return {residual_norm(sample.x, f.x_r), residual_norm(sample.x_f, f.x_f_hat1),
          residual_norm(sample.x_f, f.x_f_hat2), sample.origin_index};
}

std::vector<ScoreVector> score_windows(const ModelParams& params,
                                       std::span<const WindowSample> windows) {
  std::vector<ScoreVector> out;
  out.reserve(windows.size());
  for (const WindowSample& ws : windows) out.push_back(score_window(params, ws));
  return out;
}

double scalarize(const ScoreVector& s, const LossWeights& w, ScalarMode mode) {
  if (mode == ScalarMode::kMax) {
    return std::max({w.alpha * s.rec, w.beta * s.p1, w.gamma * s.p2});
  }
  return weighted_total(s.rec, s.p1, s.p2, w);
}

std::vector<double> scalarize(std::span<const ScoreVector> scores, const LossWeights& w,
                              ScalarMode mode) {
  std::vector<double> out;
  out.reserve(scores.size());
  for (const ScoreVector& s : scores) out.push_back(scalarize(s, w, mode));
  return out;
}

Metrics metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
  Metrics m{tp, fp, fn, tn, 0.0, 0.0, 0.0};
  const auto d = [](std::size_t v) { return static_cast<double>(v); };
  m.precision = tp + fp == 0 ? 0.0 : d(tp) / d(tp + fp);
  m.recall = tp + fn == 0 ? 0.0 : d(tp) / d(tp + fn);
  const double pr = m.precision + m.recall;
  m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
  return m;
}

Metrics evaluate(const std::vector<bool>& predicted, const std::vector<bool>& truth) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("evaluate: " + std::to_string(predicted.size()) + " predictions vs " +
                     std::to_string(truth.size()) + " labels");
  }
  if (truth.empty()) throw DataError("evaluate: no windows");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i]) {
      (truth[i] ? tp : fp)++;
    } else {
      (truth[i] ? fn : tn)++;
    }
  }
  return metrics_from_counts(tp, fp, fn, tn);
}

std::vector<bool> classify(std::span<const double> scores, double tau) {
  std::vector<bool> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > tau;
  return out;
}

std::vector<SweepRow> threshold_sweep(std::span<const double> scores,
                                      const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("threshold_sweep: " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (scores.empty()) throw DataError("threshold_sweep: no scores");
  for (double s : scores) {
    if (!std::isfinite(s)) throw NumericError("threshold_sweep: non-finite score");
  }
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  const std::size_t positives =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  const std::size_t negatives = labels.size() - positives;

  // Walking τ upward past each group of equal scores un-flags that group.
  std::vector<SweepRow> rows;
  std::size_t tp = positives, fp = negatives;
  rows.push_back({-std::numeric_limits<double>::infinity(), metrics_from_counts(tp, fp, 0, 0)});
  std::size_t k = 0;
  while (k < idx.size()) {
    const double v = scores[idx[k]];
    while (k < idx.size() && scores[idx[k]] == v) {
      (labels[idx[k]] ? tp : fp)--;
      ++k;
    }
    const double tau = k < idx.size() ? v + (scores[idx[k]] - v) / 2.0
                                      : std::numeric_limits<double>::infinity();
    rows.push_back({tau, metrics_from_counts(tp, fp, positives - tp, negatives - fp)});
  }
  return rows;
}

double select_threshold(std::span<const double> scores, const std::vector<bool>& labels,
                        const ThresholdPolicy& policy) {
  if (scores.empty()) throw DataError("select_threshold: no scores");
  if (scores.size() != labels.size()) {
    throw ShapeError("select_threshold: " + std::to_string(scores.size()) + " scores vs " +
                     std::to_string(labels.size()) + " labels");
  }
  if (policy.kind == ThresholdPolicy::Kind::kBestF1) {
    if (std::none_of(labels.begin(), labels.end(), [](bool b) { return b; })) {
      throw DataError(
          "select_threshold: best_f1 needs at least one anomalous window; use percentile mode");
    }
    const auto rows = threshold_sweep(scores, labels);
    // F1 = 2tp / (2tp + fp + fn), compared exactly so equal ratios tie
    // (exact for fewer than 2^31 windows).
    const auto best = std::max_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      const auto num = [](const Metrics& m) { return 2 * static_cast<std::uint64_t>(m.tp); };
      const auto den = [](const Metrics& m) {
        return 2 * static_cast<std::uint64_t>(m.tp) + m.fp + m.fn;
      };
      return num(a.metrics) * den(b.metrics) < num(b.metrics) * den(a.metrics);
    });
    return best->threshold;
  }

  if (!(policy.percentile >= 0.0 && policy.percentile <= 100.0)) {
    throw ConfigError("select_threshold: percentile must lie in [0, 100]");
  }
  std::vector<double> normal;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) normal.push_back(scores[i]);
  }
  if (normal.empty()) throw DataError("select_threshold: no normal windows for percentile mode");
  std::sort(normal.begin(), normal.end());
  const double pos = policy.percentile / 100.0 * static_cast<double>(normal.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, normal.size() - 1);
  return normal[lo] + (pos - static_cast<double>(lo)) * (normal[hi] - normal[lo]);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_scores_csv(std::ostream& out, std::span<const ScoreVector> scores,
                      std::span<const double> scalars, const std::vector<bool>& labels,
                      const std::vector<bool>& predicted) {
  if (scalars.size() != scores.size() || labels.size() != scores.size() ||
      predicted.size() != scores.size()) {
    throw ShapeError("write_scores_csv: column lengths differ");
  }
  out << "origin_index,rec,p1,p2,scalar,label,predicted\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const ScoreVector& s = scores[i];
    out << s.origin_index << ',' << format_double(s.rec) << ',' << format_double(s.p1) << ','
        << format_double(s.p2) << ',' << format_double(scalars[i]) << ',' << (labels[i] ? 1 : 0)
        << ',' << (predicted[i] ? 1 : 0) << '\n';
  }
}

void write_metrics(std::ostream& out, const Metrics& m, double threshold,
                   const std::string& threshold_source) {
  out << "threshold=" << format_double(threshold) << '\n'
      << "threshold_source=" << threshold_source << '\n'
      << "tp=" << m.tp << '\n'
      << "fp=" << m.fp << '\n'
      << "fn=" << m.fn << '\n'
      << "tn=" << m.tn << '\n'
      << "precision=" << format_double(m.precision) << '\n'
      << "recall=" << format_double(m.recall) << '\n'
      << "f1=" << format_double(m.f1) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "threshold,tp,fp,fn,tn,precision,recall,f1\n";
  for (const SweepRow& r : rows) {
    const Metrics& m = r.metrics;
    out << format_double(r.threshold) << ',' << m.tp << ',' << m.fp << ',' << m.fn << ',' << m.tn
        << ',' << format_double(m.precision) << ',' << format_double(m.recall) << ','
        << format_double(m.f1) << '\n';
  }
}

}  // namespace rsad
