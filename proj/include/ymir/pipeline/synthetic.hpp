#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymir/core/timeseries.hpp"

namespace ymir::pipeline {

/// Shape of a generated benchmark. Magnitudes are in units of the
/// stationary noise deviation.
struct SyntheticProfile {
  std::size_t length = 5000;
  std::size_t metrics = 6;
  std::size_t period = 288;
  std::int64_t start = 0;
  std::int64_t step = 60;
  double noise_sd = 1.0;
  double ar_coefficient = 0.6;
  double seasonal_amplitude = 8.0;
  double spike_magnitude = 8.0;
  double level_shift_magnitude = 5.0;
  double spatial_magnitude = 5.0;

  std::size_t spikes = 10;
  std::size_t phase_violations = 9;
  std::size_t level_shifts = 9;
  std::size_t spatial = 9;
  std::size_t restarts = 8;

  void validate() const;
  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static SyntheticProfile from_json(const nlohmann::json& j);
};

struct SyntheticEvent {
  std::string category;  // spike | phase | level_shift | spatial | restart
  std::size_t start = 0;
  std::size_t end = 0;   // inclusive
  std::vector<std::size_t> metrics;
  int label = 1;
};

struct SyntheticData {
  TimeSeriesSet data;
  LabelSeries labels;  // every point labeled; restarts are 0
  std::vector<SyntheticEvent> events;

  nlohmann::json events_json(const SyntheticProfile& profile, std::uint64_t seed) const;
};

/// Seasonal base plus mixed AR(1) noise with injected events. Throws
/// DataError when an event cannot be placed without overlap in 100 draws.
SyntheticData generate_synthetic(const SyntheticProfile& profile, std::uint64_t seed);

/// Writes data.csv, labels.csv and events.json under `dir`.
void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data,
                     const SyntheticProfile& profile, std::uint64_t seed);

}  // namespace ymir::pipeline
