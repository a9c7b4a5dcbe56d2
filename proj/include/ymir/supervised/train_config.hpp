#pragma once

#include <cstddef>
#include <cstdint>

#include <json.hpp>

namespace ymir::supervised {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 20;
  double momentum = 0.9;
  std::uint64_t seed = 0;
  double epsilon_max = 0.1;
  double threshold = 0.8;  // pseudo-label confidence threshold
  /// Reweight positives within each batch to balance class frequency.
  bool balance_classes = false;

  /// Throws ParameterError for out-of-range fields.
  void validate() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);
};

}  // namespace ymir::supervised
