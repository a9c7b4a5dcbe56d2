#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ymir/error.hpp"
#include "ymir/pipeline/commands.hpp"

namespace {

int exit_code(ymir::ErrorCategory c) {
  switch (c) {
    case ymir::ErrorCategory::kUsage: return 2;
    case ymir::ErrorCategory::kData: return 3;
    case ymir::ErrorCategory::kNumeric: return 4;
  }
  return 3;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ymir::pipeline;
  CLI::App app{"Ensemble anomaly detection for multivariate time series"};
  app.require_subcommand(1);

  TrainCommand train;
  std::string train_labels, train_config;
  auto* train_cmd = app.add_subcommand("train", "fit detectors, normalizer and classifier");
  train_cmd->add_option("--data", train.data, "data CSV")->required();
  train_cmd->add_option("--labels", train_labels, "label CSV (sparse or full)");
  train_cmd->add_option("--config", train_config, "pipeline config JSON");
  train_cmd->add_option("--out", train.out, "artifact directory")->required();
  train_cmd->add_flag("--unsupervised-only", train.unsupervised_only, "skip classifier training");

  DetectCommand detect;
  std::string mode = "offline";
  auto* detect_cmd = app.add_subcommand("detect", "score data with trained artifacts");
  detect_cmd->add_option("--data", detect.data, "data CSV")->required();
  detect_cmd->add_option("--model", detect.model, "artifact directory")->required();
  detect_cmd->add_option("--out", detect.out, "output directory")->required();
  detect_cmd->add_option("--mode", mode, "offline or stream")->check(CLI::IsMember({"offline", "stream"}));
  detect_cmd->add_option("--batch", detect.batch, "stream batch size")->check(CLI::PositiveNumber);

  EvalCommand eval;
  auto* eval_cmd = app.add_subcommand("eval", "best range F1 of a scores CSV");
  eval_cmd->add_option("--scores", eval.scores, "scores CSV from detect")->required();
  eval_cmd->add_option("--labels", eval.labels, "fully labeled CSV")->required();
  eval_cmd->add_option("--out", eval.out, "report JSON")->required();
  eval_cmd->add_option("--thresholds", eval.thresholds, "threshold count, 0 for every distinct score");

  SynthCommand synth;
  std::string profile;
  auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic benchmark");
  synth_cmd->add_option("--profile", profile, "profile JSON");
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--out", synth.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) {
      if (!train_labels.empty()) train.labels = train_labels;
      if (!train_config.empty()) train.config = train_config;
      const auto manifest = run_train(train);
      std::cout << "trained " << manifest.model_ids.size() << " detectors, mode " << manifest.mode << "\n";
    } else if (*detect_cmd) {
      detect.mode = mode == "stream" ? DetectMode::kStream : DetectMode::kOffline;
      const auto rows = run_detect(detect);
      std::cout << "wrote " << rows << " score rows\n";
    } else if (*eval_cmd) {
      const auto report = run_eval(eval);
      std::cout << "best range F1 " << report.best_f1 << " at threshold " << report.threshold << "\n";
    } else if (*synth_cmd) {
      if (!profile.empty()) synth.profile = profile;
      run_synth(synth);
    }
  } catch (const ymir::Error& e) {
    std::cerr << "ymir: " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "ymir: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
