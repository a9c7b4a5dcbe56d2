#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "ymir/eval/range_metrics.hpp"
#include "ymir/pipeline/artifacts.hpp"

namespace ymir::pipeline {

struct TrainCommand {
  std::filesystem::path data;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out;
  bool unsupervised_only = false;
};

/// Loads inputs, trains, and writes the artifact directory.
RunManifest run_train(const TrainCommand& cmd);

enum class DetectMode { kOffline, kStream };

struct DetectCommand {
  std::filesystem::path data;
  std::filesystem::path model;
  std::filesystem::path out;
  DetectMode mode = DetectMode::kOffline;
  std::size_t batch = 100;
};

/// Writes <out>/scores.csv and <out>/result.json; returns the row count.
std::size_t run_detect(const DetectCommand& cmd);

struct EvalCommand {
  std::filesystem::path scores;
  std::filesystem::path labels;
  std::filesystem::path out;
  std::size_t thresholds = 100;
};

/// Evaluates the classifier column, or the aggregate column when the
/// classifier column is empty, and writes the report JSON to `out`.
eval::EvalReport run_eval(const EvalCommand& cmd);

struct SynthCommand {
  std::optional<std::filesystem::path> profile;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

void run_synth(const SynthCommand& cmd);

}  // namespace ymir::pipeline
