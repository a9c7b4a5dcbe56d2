#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymir/detectors/detector.hpp"
#include "ymir/supervised/classifier.hpp"
#include "ymir/supervised/train_config.hpp"

namespace ymir::pipeline {

struct EsdSettings {
  double alpha = 0.05;
  double max_outlier_fraction = 0.02;
  /// Trailing window of aggregate scores tested when flagging a detection row.
  std::size_t window = 256;

  /// ⌈fraction·n⌉, at least 1.
  std::size_t max_outliers(std::size_t n) const;
};

struct PipelineConfig {
  std::uint64_t seed = 0;
  /// Season length in points, filled into mediff/shesd specs that omit it.
  std::size_t period = 288;
  std::vector<detectors::DetectorSpec> detectors;
  /// Empty: every detector uses its weight_hint, or 1.
  std::vector<double> weights;
  EsdSettings esd;
  supervised::ClassifierHyper classifier;
  supervised::TrainConfig train;

  /// Detector list with every built-in kind except user_defined.
  static std::vector<detectors::DetectorSpec> default_detectors(std::size_t period);
  static PipelineConfig defaults();

  /// Detector specs with the global period filled in.
  std::vector<detectors::DetectorSpec> resolved_detectors() const;
  std::vector<double> resolved_weights() const;
  /// kind, then kind_2, kind_3, … for repeated kinds.
  std::vector<std::string> model_ids() const;

  /// Throws ParameterError/RegistryError for invalid settings or unknown kinds.
  void validate(const detectors::DetectorRegistry& registry = detectors::DetectorRegistry::global()) const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);
};

/// Seed from the YMIR_SEED environment variable when set, else `fallback`.
std::uint64_t effective_seed(std::uint64_t fallback);

}  // namespace ymir::pipeline
