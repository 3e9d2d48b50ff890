// SPDX-License-Identifier: Apache-2.0
#include "cli/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "rsad/error.hpp"

namespace rsad::cli {
namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  T value{};
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": cannot parse '" + text + "' as a number");
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

template <typename T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& fmt,
                 const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += fmt(items[i]);
  }
  return out;
}

std::string anomaly_str(const InjectedAnomaly& a) {
  return to_string(a.kind) + ":" + std::to_string(a.channel) + ":" + std::to_string(a.begin) +
         ":" + std::to_string(a.end);
}

InjectedAnomaly parse_anomaly(const std::string& text, const std::string& key) {
  const auto parts = split_list(text, ':');
  if (parts.size() != 4) {
    throw ConfigError(key + ": anomaly '" + text + "' is not kind:channel:begin:end");
  }
  InjectedAnomaly a;
  a.kind = anomaly_kind_from_string(parts[0]);
  a.channel = parse_number<std::size_t>(parts[1], key);
  a.begin = parse_number<std::size_t>(parts[2], key);
  a.end = parse_number<std::size_t>(parts[3], key);
  return a;
}

std::string source_key(DataSource s) { return to_string(s); }

DataSource parse_source(const std::string& t, const std::string& key) {
  for (DataSource s : {DataSource::kSynth, DataSource::kSeries, DataSource::kDaphnet}) {
    if (t == source_key(s)) return s;
  }
  throw ConfigError(key + ": unknown data source '" + t + "' (synth, series, daphnet)");
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(const std::string&, const std::string&)> set;
  std::function<std::string()> get;
};

#define RSAD_NUM_FIELD(sec, name, ref)                                                   \
  Field {                                                                                \
    sec, name,                                                                           \
        [&c](const std::string& v, const std::string& k) {                              \
          ref = parse_number<std::remove_cvref_t<decltype(ref)>>(v, k);                  \
        },                                                                               \
        [&c] {                                                                           \
          if constexpr (std::is_floating_point_v<std::remove_cvref_t<decltype(ref)>>) {  \
            return format_double(ref);                                                   \
          } else {                                                                       \
            return std::to_string(ref);                                                  \
          }                                                                              \
        }                                                                                \
  }

std::vector<Field> schema(RunConfig& c) {
  using S = const std::string&;
  return {
      RSAD_NUM_FIELD("run", "seed", c.seed),

      RSAD_NUM_FIELD("model", "m", c.model.m),
      RSAD_NUM_FIELD("model", "w", c.model.w),
      RSAD_NUM_FIELD("model", "h", c.model.h),
      RSAD_NUM_FIELD("model", "d", c.model.d),
      Field{"model", "mlp_hidden",
            [&c](S v, S k) {
              c.model.mlp_hidden.clear();
              for (const auto& t : split_list(v, ',')) {
                c.model.mlp_hidden.push_back(parse_number<std::size_t>(t, k));
              }
            },
            [&c] {
              return join<std::size_t>(c.model.mlp_hidden,
                                       [](const std::size_t& n) { return std::to_string(n); });
            }},
      Field{"model", "reverse_decoder",
            [&c](S v, S k) { c.model.reverse_decoder = parse_bool(v, k); },
            [&c] { return std::string(c.model.reverse_decoder ? "true" : "false"); }},

      RSAD_NUM_FIELD("loss", "alpha", c.weights.alpha),
      RSAD_NUM_FIELD("loss", "beta", c.weights.beta),
      RSAD_NUM_FIELD("loss", "gamma", c.weights.gamma),

      RSAD_NUM_FIELD("train", "learning_rate", c.train.learning_rate),
      RSAD_NUM_FIELD("train", "epochs", c.train.epochs),
      RSAD_NUM_FIELD("train", "batch_size", c.train.batch_size),
      RSAD_NUM_FIELD("train", "beta1", c.train.beta1),
      RSAD_NUM_FIELD("train", "beta2", c.train.beta2),
      RSAD_NUM_FIELD("train", "epsilon", c.train.epsilon),
      RSAD_NUM_FIELD("train", "patience", c.train.patience),
      RSAD_NUM_FIELD("train", "clip_norm", c.train.clip_norm),

      Field{"data", "source", [&c](S v, S k) { c.data.source = parse_source(trim(v), k); },
            [&c] { return source_key(c.data.source); }},
      Field{"data", "series_dir", [&c](S v, S) { c.data.series_dir = trim(v); },
            [&c] { return c.data.series_dir.string(); }},
      Field{"data", "daphnet_files",
            [&c](S v, S) {
              c.data.daphnet_files.clear();
              for (const auto& t : split_list(v, ',')) c.data.daphnet_files.emplace_back(t);
            },
            [&c] {
              return join<std::filesystem::path>(
                  c.data.daphnet_files, [](const std::filesystem::path& p) { return p.string(); });
            }},
      RSAD_NUM_FIELD("data", "decimation", c.data.decimation),
      RSAD_NUM_FIELD("data", "train_stride", c.data.train_stride),
      RSAD_NUM_FIELD("data", "eval_stride", c.data.eval_stride),
      RSAD_NUM_FIELD("data", "split_train", c.data.split.train),
      RSAD_NUM_FIELD("data", "split_val", c.data.split.val),
      RSAD_NUM_FIELD("data", "split_test", c.data.split.test),
      Field{"data", "threshold",
            [&c](S v, S k) {
              const std::string t = trim(v);
              if (t == "best_f1") {
                c.data.threshold.kind = ThresholdPolicy::Kind::kBestF1;
              } else if (t == "percentile") {
                c.data.threshold.kind = ThresholdPolicy::Kind::kPercentile;
              } else {
                throw ConfigError(k + ": expected best_f1 or percentile, got '" + t + "'");
              }
            },
            [&c] {
              return std::string(c.data.threshold.kind == ThresholdPolicy::Kind::kBestF1
                                     ? "best_f1"
                                     : "percentile");
            }},
      RSAD_NUM_FIELD("data", "percentile", c.data.threshold.percentile),
      Field{"data", "score_mode",
            [&c](S v, S k) {
              const std::string t = trim(v);
              if (t == "sum") {
                c.data.score_mode = ScalarMode::kWeightedSum;
              } else if (t == "max") {
                c.data.score_mode = ScalarMode::kMax;
              } else {
                throw ConfigError(k + ": expected sum or max, got '" + t + "'");
              }
            },
            [&c] {
              return std::string(c.data.score_mode == ScalarMode::kWeightedSum ? "sum" : "max");
            }},

      RSAD_NUM_FIELD("synth", "channels", c.synth.channels),
      RSAD_NUM_FIELD("synth", "length", c.synth.length),
      Field{"synth", "frequencies",
            [&c](S v, S k) {
              c.synth.frequencies.clear();
              for (const auto& t : split_list(v, ',')) {
                c.synth.frequencies.push_back(parse_number<double>(t, k));
              }
            },
            [&c] {
              return join<double>(c.synth.frequencies, [](const double& f) { return format_double(f); });
            }},
      RSAD_NUM_FIELD("synth", "noise_std", c.synth.noise_std),
      RSAD_NUM_FIELD("synth", "spike_sigmas", c.synth.spike_sigmas),
      RSAD_NUM_FIELD("synth", "frequency_factor", c.synth.frequency_factor),
      Field{"synth", "anomalies",
            [&c](S v, S k) {
              c.synth.anomalies.clear();
              for (const auto& t : split_list(v, ',')) c.synth.anomalies.push_back(parse_anomaly(t, k));
            },
            [&c] { return join<InjectedAnomaly>(c.synth.anomalies, anomaly_str); }},
      RSAD_NUM_FIELD("synth", "plan_count", c.plan.count),
      RSAD_NUM_FIELD("synth", "plan_length", c.plan.length),
      RSAD_NUM_FIELD("synth", "plan_begin", c.plan.begin),
      RSAD_NUM_FIELD("synth", "plan_end", c.plan.end),
  };
}

#undef RSAD_NUM_FIELD

}  // namespace

std::string to_string(DataSource s) {
  switch (s) {
    case DataSource::kSynth:
      return "synth";
    case DataSource::kSeries:
      return "series";
    case DataSource::kDaphnet:
      return "daphnet";
  }
  return "unknown";
}

void RunConfig::validate() const {
  model.validate();
  weights.validate();
  train.validate();
  if (data.decimation == 0) throw ConfigError("data.decimation must be >= 1");
  if (data.train_stride == 0 || data.eval_stride == 0) {
    throw ConfigError("data.train_stride and data.eval_stride must be >= 1");
  }
  if (!(data.threshold.percentile >= 0.0 && data.threshold.percentile <= 100.0)) {
    throw ConfigError("data.percentile must lie in [0, 100]");
  }
  if (data.source == DataSource::kSeries && data.series_dir.empty()) {
    throw ConfigError("data.source = series needs data.series_dir");
  }
  if (data.source == DataSource::kDaphnet && data.daphnet_files.empty()) {
    throw ConfigError("data.source = daphnet needs data.daphnet_files");
  }
  synth.validate();
}

void RunConfig::resolve() {
  train.seed = seed;
  if (plan.count > 0) {
    const std::size_t end = plan.end == 0 ? synth.length : plan.end;
    auto planned = plan_anomalies(synth.channels, plan.begin, end, plan.count, plan.length, seed);
    synth.anomalies.insert(synth.anomalies.end(), planned.begin(), planned.end());
    plan = AnomalyPlan{};
  }
  validate();
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig cfg;
  const auto fields = schema(cfg);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(source + ": key '" + section + "' must live inside a [section]");
    }
    for (const auto& [key, value] : body) {
      const std::string name = section + "." + key;
      const auto it = std::find_if(fields.begin(), fields.end(), [&](const Field& f) {
        return f.section == section && f.key == key;
      });
      if (it == fields.end()) throw ConfigError(source + ": unknown key " + name);
      it->set(value.data(), name);
    }
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_config(in, path.string());
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  RunConfig copy = cfg;
  pt::ptree tree;
  for (const Field& f : schema(copy)) tree.put(pt::ptree::path_type(f.section + "." + f.key, '.'), f.get());
  pt::write_ini(out, tree);
}

}  // namespace rsad::cli
