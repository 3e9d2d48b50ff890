// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "cli/commands.hpp"

namespace {

using namespace rsad;
using namespace rsad::cli;

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool out_required) {
  cmd->add_option("--config", args.config, "INI run configuration")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", args.out, "Output directory");
  if (out_required) out->required();
  cmd->add_option("--seed", args.seed, "Seed (overrides [run] seed)");
}

RunConfig build_config(const CommonArgs& args, bool gradcheck) {
  RunConfig cfg = args.config.empty() ? RunConfig{} : load_config(args.config);
  if (gradcheck && args.config.empty()) cfg.model = gradcheck_default_model();
  if (args.seed) cfg.seed = *args.seed;
  cfg.resolve();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rsad: LSTM reconstruction and prediction anomaly detection"};
  app.require_subcommand(1);

  CommonArgs synth_args, train_args, detect_args, grad_args;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic series with injected anomalies");
  add_common(synth, synth_args, true);

  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_common(train, train_args, true);

  auto* detect = app.add_subcommand("detect", "Score the test split and report P/R/F1");
  add_common(detect, detect_args, true);
  std::string checkpoint;
  std::optional<double> threshold;
  detect->add_option("--checkpoint", checkpoint, "Checkpoint from `train`")
      ->required()
      ->check(CLI::ExistingFile);
  detect->add_option("--threshold", threshold, "Fixed threshold; skips selection");

  auto* grad = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  add_common(grad, grad_args, false);
  int corrupt_block = -1;
  grad->add_option("--corrupt-block", corrupt_block)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (synth->parsed()) {
      cmd_synth(build_config(synth_args, false), synth_args.out, std::cout);
    } else if (train->parsed()) {
      cmd_train(build_config(train_args, false), train_args.out, std::cout);
    } else if (detect->parsed()) {
      cmd_detect(build_config(detect_args, false), checkpoint, threshold, detect_args.out,
                 std::cout);
    } else if (grad->parsed()) {
      const std::string out = grad_args.out.empty() ? "." : grad_args.out;
      cmd_gradcheck(build_config(grad_args, true), out, std::cout, corrupt_block);
    }
  } catch (const std::exception& e) {
    std::cerr << "rsad: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kExitOk;
}
