// SPDX-License-Identifier: Apache-2.0
#include "cli/commands.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rsad/checkpoint.hpp"

namespace rsad::cli {
namespace fs = std::filesystem;

namespace {

/// Timestamped lines go to run.log only, so every other output is reproducible.
class RunLog {
 public:
  RunLog(const fs::path& dir, std::ostream& console) : console_(console) {
    fs::create_directories(dir);
    file_.open(dir / "run.log", std::ios::app);
    if (!file_) throw ConfigError("cannot write " + (dir / "run.log").string());
  }

  void operator()(const std::string& msg, bool echo = true) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    file_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << ' ' << msg << '\n';
    file_.flush();
    if (echo) console_ << msg << '\n';
  }

 private:
  std::ofstream file_;
  std::ostream& console_;
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

void write_resolved(const fs::path& dir, const RunConfig& cfg) {
  auto out = open_out(dir / "config.ini");
  write_config(out, cfg);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  return out;
}

double parse_cell(const std::string& cell, const fs::path& file, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ParseError(file.string(), line, "bad number '" + cell + "'");
  }
  return v;
}

void require_channels(const ModelConfig& model, const SeriesSet& s) {
  if (model.m != s.channels()) {
    throw ShapeError("model expects " + std::to_string(model.m) + " channels but the data has " +
                     std::to_string(s.channels()));
  }
}

std::string fmt3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const VerificationError*>(&e)) return kExitVerification;
  if (dynamic_cast<const NumericError*>(&e)) return kExitDivergence;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ShapeError*>(&e)) {
    return kExitConfig;
  }
  return kExitData;
}

void write_series_csv(const fs::path& dir, const SeriesSet& s) {
  auto series = open_out(dir / "series.csv");
  series << 't';
  for (std::size_t c = 0; c < s.channels(); ++c) series << ",ch" << c;
  series << '\n';
  for (std::size_t t = 0; t < s.length(); ++t) {
    series << t;
    for (std::size_t c = 0; c < s.channels(); ++c) series << ',' << format_double(s.x(c, t));
    series << '\n';
  }
  auto labels = open_out(dir / "labels.csv");
  labels << "t,label\n";
  for (std::size_t t = 0; t < s.length(); ++t) labels << t << ',' << (s.labels[t] ? 1 : 0) << '\n';
}

SeriesSet read_series_csv(const fs::path& dir) {
  const fs::path series_path = dir / "series.csv";
  const fs::path labels_path = dir / "labels.csv";
  std::ifstream series(series_path), labels(labels_path);
  if (!series) throw DataError("cannot open " + series_path.string());
  if (!labels) throw DataError("cannot open " + labels_path.string());

  std::string line;
  if (!std::getline(series, line)) throw EmptyInputError(series_path.string() + ": empty");
  const std::size_t channels = split_csv(line).size() - 1;
  if (channels == 0) throw ParseError(series_path.string(), 1, "no channel columns");

  std::vector<std::vector<double>> rows;
  for (std::size_t n = 2; std::getline(series, line); ++n) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != channels + 1) {
      throw ParseError(series_path.string(), n,
                       "expected " + std::to_string(channels + 1) + " columns");
    }
    std::vector<double> row;
    for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(parse_cell(cells[c], series_path, n));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmptyInputError(series_path.string() + ": no rows");

  SeriesSet s;
  s.x = Mat(channels, rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (std::size_t c = 0; c < channels; ++c) s.x(c, t) = rows[t][c];
  }
  std::getline(labels, line);
  for (std::size_t n = 2; std::getline(labels, line); ++n) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2 || (cells[1] != "0" && cells[1] != "1")) {
      throw ParseError(labels_path.string(), n, "expected t,0|1");
    }
    s.labels.push_back(cells[1] == "1");
  }
  if (s.labels.size() != rows.size()) {
    throw DataError(labels_path.string() + ": " + std::to_string(s.labels.size()) +
                    " labels for " + std::to_string(rows.size()) + " rows");
  }
  s.segments = {{0, rows.size()}};
  return s;
}

SeriesSet load_series(const RunConfig& cfg) {
  switch (cfg.data.source) {
    case DataSource::kSynth:
      return synth_generate(cfg.synth, cfg.seed);
    case DataSource::kSeries:
      return read_series_csv(cfg.data.series_dir);
    case DataSource::kDaphnet: {
      SeriesSet all;
      for (const fs::path& f : cfg.data.daphnet_files) {
        all = concatenate(all, segmentize(parse_daphnet(f), cfg.data.decimation));
      }
      return all;
    }
  }
  throw ConfigError("unknown data source");
}

void cmd_synth(const RunConfig& cfg, const fs::path& out, std::ostream& console) {
  RunLog log(out, console);
  const SeriesSet s = synth_generate(cfg.synth, cfg.seed);
  write_series_csv(out, s);
  write_resolved(out, cfg);
  const auto anomalous = std::count(s.labels.begin(), s.labels.end(), true);
  log("synth: " + std::to_string(s.channels()) + " channels x " + std::to_string(s.length()) +
      " steps, " + std::to_string(cfg.synth.anomalies.size()) + " anomalies (" +
      std::to_string(anomalous) + " labelled steps) -> " + out.string());
}

TrainSummary cmd_train(const RunConfig& cfg, const fs::path& out, std::ostream& console) {
  RunLog log(out, console);
  const SeriesSet series = load_series(cfg);
  require_channels(cfg.model, series);
  const SeriesSplit parts = split(series, cfg.data.split);

  const NormStats stats = fit_normalize(parts.train);
  const auto train = normal_only(
      make_windows(apply_normalize(parts.train, stats), cfg.model.w, cfg.model.h, cfg.data.train_stride));
  const auto val = normal_only(
      make_windows(apply_normalize(parts.val, stats), cfg.model.w, cfg.model.h, cfg.data.train_stride));
  log("train: " + std::to_string(train.size()) + " training windows, " +
      std::to_string(val.size()) + " validation windows (normal only)");

  const ModelParams init = ModelParams::initialize(cfg.model, cfg.seed);
  log("train: " + std::to_string(init.parameter_count()) + " parameters");
  FitResult result = fit(init, train, val, cfg.weights, cfg.train, [&](const EpochRecord& e) {
    log("epoch " + std::to_string(e.epoch) + "/" + std::to_string(cfg.train.epochs) +
        " train_total " + format_double(e.train.total) + " val_total " + format_double(e.val.total));
  });

  const fs::path ckpt = out / "model.ckpt";
  save_checkpoint({result.params, cfg.weights, stats}, ckpt);
  auto hist = open_out(out / "history.csv");
  hist << "epoch,train_rec,train_p1,train_p2,train_total,val_total\n";
  for (const EpochRecord& e : result.history) {
    hist << e.epoch << ',' << format_double(e.train.rec) << ',' << format_double(e.train.p1) << ','
         << format_double(e.train.p2) << ',' << format_double(e.train.total) << ','
         << format_double(e.val.total) << '\n';
  }
  write_resolved(out, cfg);
  log("train: best epoch " + std::to_string(result.best_epoch) +
      (result.stopped_early ? " (stopped early)" : "") + ", checkpoint " + ckpt.string());
  return {std::move(result), ckpt};
}

DetectSummary cmd_detect(const RunConfig& cfg, const fs::path& checkpoint,
                         std::optional<double> threshold, const fs::path& out,
                         std::ostream& console) {
  RunLog log(out, console);
  const Checkpoint ck = load_checkpoint(checkpoint);
  const ModelConfig& model = ck.params.config;
  const SeriesSet series = load_series(cfg);
  require_channels(model, series);
  const SeriesSplit parts = split(series, cfg.data.split);
  for (const auto& w : parts.warnings) log("warning: " + w);

  const auto test = make_windows(apply_normalize(parts.test, ck.norm_stats), model.w, model.h,
                                 cfg.data.eval_stride);
  const auto test_scores = score_windows(ck.params, test);
  const auto test_scalar = scalarize(test_scores, ck.weights, cfg.data.score_mode);
  std::vector<bool> test_labels;
  for (const auto& w : test) test_labels.push_back(w.label);

  DetectSummary summary;
  if (threshold) {
    summary.threshold = *threshold;
    summary.threshold_source = "explicit";
  } else {
    const auto val = make_windows(apply_normalize(parts.val, ck.norm_stats), model.w, model.h,
                                  cfg.data.eval_stride);
    const auto val_scalar = scalarize(score_windows(ck.params, val), ck.weights, cfg.data.score_mode);
    std::vector<bool> val_labels;
    for (const auto& w : val) val_labels.push_back(w.label);
    ThresholdPolicy policy = cfg.data.threshold;
    const bool has_pos = std::find(val_labels.begin(), val_labels.end(), true) != val_labels.end();
    if (policy.kind == ThresholdPolicy::Kind::kBestF1 && !has_pos) {
      log("warning: no anomalous validation windows; using the percentile threshold");
      policy.kind = ThresholdPolicy::Kind::kPercentile;
    }
    summary.threshold = select_threshold(val_scalar, val_labels, policy);
    summary.threshold_source = policy.kind == ThresholdPolicy::Kind::kBestF1
                                   ? "best_f1(val)"
                                   : "percentile(val," + format_double(policy.percentile) + ")";
  }

  const auto predicted = classify(test_scalar, summary.threshold);
  summary.metrics = evaluate(predicted, test_labels);

  {
    auto scores = open_out(out / "scores.csv");
    write_scores_csv(scores, test_scores, test_scalar, test_labels, predicted);
    auto metrics = open_out(out / "metrics.txt");
    write_metrics(metrics, summary.metrics, summary.threshold, summary.threshold_source);
    auto sweep = open_out(out / "threshold_sweep.csv");
    if (std::find(test_labels.begin(), test_labels.end(), true) != test_labels.end()) {
      const auto rows = threshold_sweep(test_scalar, test_labels);
      write_sweep_csv(sweep, rows);
    } else {
      write_sweep_csv(sweep, {});
    }
  }
  write_resolved(out, cfg);

  const Metrics& m = summary.metrics;
  log("detect: " + std::to_string(test.size()) + " test windows, threshold " +
          format_double(summary.threshold) + " (" + summary.threshold_source + ")",
      false);
  log("precision=" + fmt3(m.precision) + " recall=" + fmt3(m.recall) + " f1=" + fmt3(m.f1) +
      " tp=" + std::to_string(m.tp) + " fp=" + std::to_string(m.fp) +
      " fn=" + std::to_string(m.fn) + " tn=" + std::to_string(m.tn));
  return summary;
}

ModelConfig gradcheck_default_model() {
  ModelConfig c;
  c.m = 3;
  c.w = 8;
  c.h = 2;
  c.d = 5;
  c.mlp_hidden = {4};
  return c;
}

GradCheckReport cmd_gradcheck(const RunConfig& cfg, const fs::path& out, std::ostream& console,
                              int corrupt_block) {
  RunLog log(out, console);
  const std::size_t n = ModelParams::zeros(cfg.model).parameter_count();
  if (n > kGradCheckMaxParams) {
    throw ConfigError("gradcheck: model has " + std::to_string(n) + " parameters; refusing above " +
                      std::to_string(kGradCheckMaxParams) + " (finite differences too slow)");
  }
  const GradCheckReport report =
      check_gradients_random(cfg.model, cfg.weights, cfg.seed, 1e-5, corrupt_block);
  auto file = open_out(out / "gradcheck.txt");
  for (const auto& b : report.blocks) {
    const std::string line = b.name + " max_rel_error=" + format_double(b.max_rel_error) +
                             " max_abs_error=" + format_double(b.max_abs_error);
    file << line << '\n';
    console << line << '\n';
  }
  const bool ok = report.passed(kGradCheckTolerance);
  file << "max_rel_error=" << format_double(report.max_rel_error) << '\n'
       << "passed=" << (ok ? "true" : "false") << '\n';
  log("gradcheck: " + std::to_string(n) + " parameters, max relative error " +
      format_double(report.max_rel_error) + (ok ? " (pass)" : " (FAIL)"));
  if (!ok) {
    throw VerificationError("gradcheck: max relative error " + format_double(report.max_rel_error) +
                            " exceeds " + format_double(kGradCheckTolerance));
  }
  return report;
}

}  // namespace rsad::cli
