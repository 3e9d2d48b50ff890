// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "rsad/mat.hpp"

namespace rsad {

inline constexpr std::size_t kDaphnetChannels = 9;
inline constexpr double kStdFloor = 1e-8;

/// One line of a Daphnet recording: time (ms), three 3-axis accelerometers
/// (milli-g), annotation 0 = outside experiment, 1 = walking, 2 = freeze.
struct RawRecord {
  std::int64_t timestamp_ms = 0;
  std::array<double, kDaphnetChannels> channels{};
  int annotation = 0;
};

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// Half-open column range [begin, end) of one contiguous recording segment.
struct SegmentBounds {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  friend bool operator==(const SegmentBounds&, const SegmentBounds&) = default;
};

/// A multivariate series (channels x time) with per-timestamp anomaly labels.
/// Windows never cross a segment boundary.
struct SeriesSet {
  Mat x;
  std::vector<bool> labels;
  NormStats norm_stats;
  std::vector<SegmentBounds> segments;

  std::size_t channels() const { return x.rows(); }
  std::size_t length() const { return x.cols(); }
};

struct WindowSample {
  Mat x;    ///< m x w input
  Mat x_f;  ///< m x h future target
  bool label = false;
  std::size_t origin_index = 0;  ///< first column of the window within the series
};

std::vector<RawRecord> parse_daphnet(const std::filesystem::path& path);
/// Stream variant; `source` is used in error messages.
std::vector<RawRecord> parse_daphnet(std::istream& in, const std::string& source);

/// Drops annotation-0 records and turns every maximal run of the rest into a
/// segment. `decimation` keeps every n-th record.
SeriesSet segmentize(const std::vector<RawRecord>& records, std::size_t decimation = 1);

/// Appends `b` after `a`, keeping both segment lists.
SeriesSet concatenate(const SeriesSet& a, const SeriesSet& b);

NormStats fit_normalize(const SeriesSet& train);
SeriesSet apply_normalize(const SeriesSet& series, const NormStats& stats);
SeriesSet invert_normalize(const SeriesSet& series, const NormStats& stats);

std::vector<WindowSample> make_windows(const SeriesSet& series, std::size_t w, std::size_t h,
                                       std::size_t stride);
std::vector<WindowSample> normal_only(std::vector<WindowSample> windows);

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct SeriesSplit {
  SeriesSet train;
  SeriesSet val;
  SeriesSet test;
  std::vector<std::string> warnings;
};

/// Chronological split of every segment by `ratios`.
SeriesSplit split(const SeriesSet& series, const SplitRatios& ratios);

enum class AnomalyKind { kSpike, kFrequencyShift, kCorrelationBreak };

std::string to_string(AnomalyKind kind);
AnomalyKind anomaly_kind_from_string(const std::string& s);

struct InjectedAnomaly {
  AnomalyKind kind = AnomalyKind::kSpike;
  std::size_t channel = 0;
  std::size_t begin = 0;
  std::size_t end = 0;  ///< exclusive
};

/// Phase-locked sinusoid channels with Gaussian noise and injected anomalies.
struct SynthSpec {
  std::size_t channels = 6;
  std::size_t length = 20000;
  /// Cycles per sample; channel i uses frequencies[i % size].
  std::vector<double> frequencies{0.02, 0.031, 0.047};
  double noise_std = 0.05;
  /// Spike offset magnitude in units of noise_std.
  double spike_sigmas = 5.0;
  double frequency_factor = 3.0;
  std::vector<InjectedAnomaly> anomalies;

  void validate() const;
};

SeriesSet synth_generate(const SynthSpec& spec, std::uint64_t seed);

/// Adds `count` non-overlapping anomalies of rotating kinds, each `length`
/// steps long, inside [begin, end). Deterministic in `seed`.
std::vector<InjectedAnomaly> plan_anomalies(std::size_t channels, std::size_t begin,
                                            std::size_t end, std::size_t count,
                                            std::size_t length, std::uint64_t seed);

}  // namespace rsad
