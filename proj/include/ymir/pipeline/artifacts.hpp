#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymir/core/timeseries.hpp"
#include "ymir/ensemble/ensemble.hpp"
#include "ymir/pipeline/config.hpp"
#include "ymir/pipeline/detection.hpp"
#include "ymir/supervised/labels.hpp"

namespace ymir::pipeline {

inline constexpr const char* kVersion = "0.1.0";

struct Fingerprint {
  std::size_t length = 0;
  std::size_t metric_count = 0;
  std::string checksum;  // FNV-1a 64 over names, timestamps and value bits

  static Fingerprint of(const TimeSeriesSet& ts);
  bool operator==(const Fingerprint&) const = default;
};

struct RunManifest {
  std::string version = kVersion;
  std::string mode;  // unsupervised | semi_supervised | supervised
  double rho = 0.0;
  PipelineConfig config;
  std::vector<std::string> metric_names;
  std::vector<std::string> model_ids;
  std::int64_t step = 0;
  std::vector<std::string> files;
  Fingerprint fingerprint;

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

struct TrainOutputs {
  RunManifest manifest;
  DetectionModel model;
  ensemble::FeatureMatrix train_features;
  ensemble::UnsupervisedResult train_result;
  std::optional<supervised::FusedLabels> labels;
};

/// Fits detectors, normalizer and (when labels are given and not
/// `unsupervised_only`) the classifier on `data`. Missing cells are imputed.
TrainOutputs train_pipeline(const TimeSeriesSet& data, const LabelSeries* labels,
                            const PipelineConfig& config, bool unsupervised_only = false,
                            const detectors::DetectorRegistry& registry = detectors::DetectorRegistry::global());

/// Writes manifest.json, detectors/<model_id>.json, normalizer.json,
/// train_result.json and, when trained, classifier.json under `dir`.
void save_artifacts(const std::filesystem::path& dir, const TrainOutputs& outputs);

struct LoadedModel {
  RunManifest manifest;
  DetectionModel model;
};

/// Throws ManifestError for missing or inconsistent artifacts.
LoadedModel load_artifacts(const std::filesystem::path& dir,
                           const detectors::DetectorRegistry& registry = detectors::DetectorRegistry::global());

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace ymir::pipeline
