// SPDX-License-Identifier: Apache-2.0
#include "rsad/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "rsad/error.hpp"

namespace rsad {
namespace {

bool parse_int(std::string_view token, std::int64_t& out) {
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

}  // namespace

std::vector<RawRecord> parse_daphnet(std::istream& in, const std::string& source) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.empty()) continue;
    if (tokens.size() != kDaphnetChannels + 2) {
      throw ParseError(source, line_no,
                       "expected 11 fields, found " + std::to_string(tokens.size()));
    }
    std::array<std::int64_t, kDaphnetChannels + 2> values{};
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!parse_int(tokens[i], values[i])) {
        throw ParseError(source, line_no, "non-integer token '" + tokens[i] + "'");
      }
    }
    RawRecord r;
    r.timestamp_ms = values[0];
    for (std::size_t c = 0; c < kDaphnetChannels; ++c) {
      r.channels[c] = static_cast<double>(values[c + 1]);
    }
    r.annotation = static_cast<int>(values.back());
    if (r.annotation < 0 || r.annotation > 2) {
      throw ParseError(source, line_no, "annotation must be 0, 1 or 2");
    }
    records.push_back(r);
  }
  if (records.empty()) throw EmptyInputError(source + ": no records");
  return records;
}

std::vector<RawRecord> parse_daphnet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_daphnet(in, path.string());
}

SeriesSet segmentize(const std::vector<RawRecord>& records, std::size_t decimation) {
  if (records.empty()) throw EmptyInputError("segmentize: no records");
  if (decimation == 0) throw ConfigError("segmentize: decimation must be >= 1");

  std::vector<const RawRecord*> kept;
  std::vector<SegmentBounds> segments;
  bool in_run = false;
  std::size_t run_pos = 0;
  for (const RawRecord& r : records) {
    if (r.annotation == 0) {
      if (in_run) segments.back().end = kept.size();
      in_run = false;
      continue;
    }
    if (!in_run) {
      segments.push_back({kept.size(), kept.size()});
      in_run = true;
      run_pos = 0;
    }
    if (run_pos++ % decimation == 0) kept.push_back(&r);
  }
  if (in_run) segments.back().end = kept.size();
  if (kept.empty()) throw DataError("segmentize: every record is outside the experiment");

  SeriesSet s;
  s.x = Mat(kDaphnetChannels, kept.size());
  s.labels.resize(kept.size());
  for (std::size_t t = 0; t < kept.size(); ++t) {
    for (std::size_t c = 0; c < kDaphnetChannels; ++c) s.x(c, t) = kept[t]->channels[c];
    s.labels[t] = kept[t]->annotation == 2;
  }
  s.segments = std::move(segments);
  return s;
}

SeriesSet concatenate(const SeriesSet& a, const SeriesSet& b) {
  if (a.length() == 0) return b;
  if (b.length() == 0) return a;
  if (a.channels() != b.channels()) {
    throw ShapeError("concatenate: " + a.x.shape_str() + " with " + b.x.shape_str());
  }
  SeriesSet out;
  out.x = Mat(a.channels(), a.length() + b.length());
  for (std::size_t c = 0; c < a.channels(); ++c) {
    for (std::size_t t = 0; t < a.length(); ++t) out.x(c, t) = a.x(c, t);
    for (std::size_t t = 0; t < b.length(); ++t) out.x(c, a.length() + t) = b.x(c, t);
  }
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.norm_stats = a.norm_stats;
  out.segments = a.segments;
  for (SegmentBounds seg : b.segments) {
    out.segments.push_back({seg.begin + a.length(), seg.end + a.length()});
  }
  return out;
}

NormStats fit_normalize(const SeriesSet& train) {
  const std::size_t n = train.length();
  if (n == 0) throw DataError("fit_normalize: empty training series");
  NormStats stats;
  for (std::size_t c = 0; c < train.channels(); ++c) {
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) sum += train.x(c, t);
    double mean = sum / static_cast<double>(n);
    double resid = 0.0;
    for (std::size_t t = 0; t < n; ++t) resid += train.x(c, t) - mean;
    mean += resid / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double d = train.x(c, t) - mean;
      ss += d * d;
    }
    stats.mean.push_back(mean);
    stats.stddev.push_back(std::max(std::sqrt(ss / static_cast<double>(n)), kStdFloor));
  }
  return stats;
}

namespace {

void require_stats(const SeriesSet& s, const NormStats& stats) {
  if (stats.mean.size() != s.channels() || stats.stddev.size() != s.channels()) {
    throw ShapeError("normalization stats for " + std::to_string(stats.mean.size()) +
                     " channels applied to " + std::to_string(s.channels()));
  }
}

}  // namespace

SeriesSet apply_normalize(const SeriesSet& series, const NormStats& stats) {
  require_stats(series, stats);
  SeriesSet out = series;
  for (std::size_t c = 0; c < out.channels(); ++c) {
    const double sd = std::max(stats.stddev[c], kStdFloor);
    for (std::size_t t = 0; t < out.length(); ++t) {
      out.x(c, t) = (series.x(c, t) - stats.mean[c]) / sd;
    }
  }
  out.norm_stats = stats;
  return out;
}

SeriesSet invert_normalize(const SeriesSet& series, const NormStats& stats) {
  require_stats(series, stats);
  SeriesSet out = series;
  for (std::size_t c = 0; c < out.channels(); ++c) {
    const double sd = std::max(stats.stddev[c], kStdFloor);
    for (std::size_t t = 0; t < out.length(); ++t) {
      out.x(c, t) = series.x(c, t) * sd + stats.mean[c];
    }
  }
  return out;
}

std::vector<WindowSample> make_windows(const SeriesSet& series, std::size_t w, std::size_t h,
                                       std::size_t stride) {
  if (w == 0 || h == 0 || stride == 0) {
    throw ConfigError("make_windows: w, h and stride must be positive");
  }
  std::vector<WindowSample> out;
  bool any_long_enough = false;
  for (const SegmentBounds& seg : series.segments) {
    if (seg.length() < w + h) continue;
    any_long_enough = true;
    for (std::size_t s = seg.begin; s + w + h <= seg.end; s += stride) {
      WindowSample ws;
      ws.x = series.x.col_block(s, s + w);
      ws.x_f = series.x.col_block(s + w, s + w + h);
      ws.label = std::any_of(series.labels.begin() + static_cast<std::ptrdiff_t>(s),
                             series.labels.begin() + static_cast<std::ptrdiff_t>(s + w),
                             [](bool b) { return b; });
      ws.origin_index = s;
      out.push_back(std::move(ws));
    }
  }
  if (!any_long_enough) {
    throw DataError("make_windows: no segment has at least w + h = " + std::to_string(w + h) +
                    " steps");
  }
  return out;
}

std::vector<WindowSample> normal_only(std::vector<WindowSample> windows) {
  std::erase_if(windows, [](const WindowSample& ws) { return ws.label; });
  return windows;
}

namespace {

SeriesSet slice_segments(const SeriesSet& series,
                         const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  std::size_t total = 0;
  for (auto [b, e] : ranges) total += e - b;
  SeriesSet out;
  out.x = Mat(series.channels(), total);
  out.labels.reserve(total);
  out.norm_stats = series.norm_stats;
  std::size_t pos = 0;
  for (auto [b, e] : ranges) {
    if (e == b) continue;
    for (std::size_t c = 0; c < series.channels(); ++c) {
      for (std::size_t t = b; t < e; ++t) out.x(c, pos + t - b) = series.x(c, t);
    }
    out.labels.insert(out.labels.end(), series.labels.begin() + static_cast<std::ptrdiff_t>(b),
                      series.labels.begin() + static_cast<std::ptrdiff_t>(e));
    out.segments.push_back({pos, pos + e - b});
    pos += e - b;
  }
  return out;
}

}  // namespace

SeriesSplit split(const SeriesSet& series, const SplitRatios& ratios) {
  for (double r : {ratios.train, ratios.val, ratios.test}) {
    if (!(r > 0.0)) throw ConfigError("split: ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split: ratios must sum to 1");
  }
  std::vector<std::pair<std::size_t, std::size_t>> train, val, test;
  for (const SegmentBounds& seg : series.segments) {
    const double len = static_cast<double>(seg.length());
    const auto b1 = seg.begin + static_cast<std::size_t>(std::llround(len * ratios.train));
    const auto b2 =
        seg.begin + static_cast<std::size_t>(std::llround(len * (ratios.train + ratios.val)));
    train.emplace_back(seg.begin, b1);
    val.emplace_back(b1, b2);
    test.emplace_back(b2, seg.end);
  }
  SeriesSplit out{slice_segments(series, train), slice_segments(series, val),
                  slice_segments(series, test), {}};
  if (std::none_of(out.val.labels.begin(), out.val.labels.end(), [](bool b) { return b; })) {
    out.warnings.push_back(
        "validation split contains no anomalous timestamps; threshold selection falls back to "
        "percentile mode");
  }
  return out;
}

std::string to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kSpike:
      return "spike";
    case AnomalyKind::kFrequencyShift:
      return "frequency_shift";
    case AnomalyKind::kCorrelationBreak:
      return "correlation_break";
  }
  return "unknown";
}

AnomalyKind anomaly_kind_from_string(const std::string& s) {
  if (s == "spike") return AnomalyKind::kSpike;
  if (s == "frequency_shift") return AnomalyKind::kFrequencyShift;
  if (s == "correlation_break") return AnomalyKind::kCorrelationBreak;
  throw ConfigError("unknown anomaly type '" + s + "'");
}

namespace {

std::string interval_str(const InjectedAnomaly& a) {
  return "[" + std::to_string(a.begin) + "," + std::to_string(a.end) + ")";
}

}  // namespace

void SynthSpec::validate() const {
  if (channels == 0 || length == 0) throw ConfigError("synth: channels and length must be positive");
  if (frequencies.empty()) throw ConfigError("synth: at least one base frequency is required");
  if (!(noise_std >= 0.0)) throw ConfigError("synth: noise_std must be >= 0");
  for (const InjectedAnomaly& a : anomalies) {
    if (a.begin >= a.end || a.end > length) {
      throw ConfigError("synth: anomaly interval " + interval_str(a) + " outside [0," +
                        std::to_string(length) + ")");
    }
    if (a.channel >= channels) {
      throw ConfigError("synth: anomaly channel " + std::to_string(a.channel) + " out of range");
    }
  }
  auto sorted = anomalies;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].begin < sorted[i - 1].end) {
      throw ConfigError("synth: overlapping anomaly intervals " + interval_str(sorted[i - 1]) +
                        " and " + interval_str(sorted[i]));
    }
  }
}

SeriesSet synth_generate(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  const std::size_t m = spec.channels;

  // Channels sharing a base frequency stay phase-locked at fixed offsets.
  std::vector<double> freq(m), phase(m);
  for (std::size_t c = 0; c < m; ++c) {
    freq[c] = spec.frequencies[c % spec.frequencies.size()];
    phase[c] = two_pi * static_cast<double>(c) / static_cast<double>(m);
  }

  const auto clean = [&](std::size_t t, double f, double p) {
    return std::sin(two_pi * f * static_cast<double>(t) + p);
  };

  SeriesSet s;
  s.x = Mat(m, spec.length);
  s.labels.assign(spec.length, false);
  s.segments = {{0, spec.length}};
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t t = 0; t < spec.length; ++t) {
      s.x(c, t) = clean(t, freq[c], phase[c]) + spec.noise_std * noise(rng);
    }
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const InjectedAnomaly& a : spec.anomalies) {
    const std::size_t c = a.channel;
    switch (a.kind) {
      case AnomalyKind::kSpike: {
        const double mag = spec.spike_sigmas * spec.noise_std;
        for (std::size_t t = a.begin; t < a.end; ++t) s.x(c, t) += unit(rng) < 0.5 ? -mag : mag;
        break;
      }
      case AnomalyKind::kFrequencyShift:
      case AnomalyKind::kCorrelationBreak: {
        double f = freq[c];
        double p = phase[c];
        if (a.kind == AnomalyKind::kFrequencyShift) {
          f *= spec.frequency_factor;
        } else {
          // New phase drawn at least a quarter cycle away from the locked one.
          p += two_pi * (0.25 + 0.5 * unit(rng));
        }
        for (std::size_t t = a.begin; t < a.end; ++t) {
          s.x(c, t) += clean(t, f, p) - clean(t, freq[c], phase[c]);
        }
        break;
      }
    }
    for (std::size_t t = a.begin; t < a.end; ++t) s.labels[t] = true;
  }
  return s;
}

std::vector<InjectedAnomaly> plan_anomalies(std::size_t channels, std::size_t begin,
                                            std::size_t end, std::size_t count,
                                            std::size_t length, std::uint64_t seed) {
  if (count == 0) return {};
  if (end <= begin || (end - begin) / count < length) {
    throw ConfigError("plan_anomalies: range too short for " + std::to_string(count) +
                      " anomalies of length " + std::to_string(length));
  }
  std::mt19937_64 rng(seed);
  const std::size_t slot = (end - begin) / count;
  std::vector<InjectedAnomaly> out;
  for (std::size_t k = 0; k < count; ++k) {
    std::uniform_int_distribution<std::size_t> offset(0, slot - length);
    std::uniform_int_distribution<std::size_t> channel(0, channels - 1);
    InjectedAnomaly a;
    a.kind = static_cast<AnomalyKind>(k % 3);
    a.channel = channel(rng);
    a.begin = begin + k * slot + offset(rng);
    a.end = a.begin + length;
    out.push_back(a);
  }
  return out;
}

}  // namespace rsad
