#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "ymir/core/timeseries.hpp"
#include "ymir/ensemble/ensemble.hpp"
#include "ymir/matrix.hpp"

namespace ymir::supervised {

/// Per-metric mean/deviation fitted on training data.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const TimeSeriesSet& train);
  double apply(std::size_t metric, double v) const { return (v - mean[metric]) / scale[metric]; }

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);

  bool operator==(const Standardizer&) const = default;
};

/// Standardized raw rows [start, start + w) of a T×n value matrix.
Matrix raw_window(const Matrix& values, std::size_t start, std::size_t window, const Standardizer& standardizer);
/// Feature rows [start, start + w) of a T×k feature matrix.
Matrix feature_window(const Matrix& features, std::size_t start, std::size_t window);

struct Sample {
  Matrix raw;       // w×n
  Matrix features;  // w×k
  double target = 0.0;
  std::size_t center = 0;
};

struct Dataset {
  std::size_t window = 0;
  std::size_t metric_count = 0;
  std::size_t model_count = 0;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
};

/// One sample per window start (stride 1); the target is read at the window
/// center start + ⌊w/2⌋. Throws SizeError when w > T.
Dataset build_dataset(const TimeSeriesSet& ts, const ensemble::FeatureMatrix& features,
                      std::span<const double> targets, std::size_t window,
                      const Standardizer& standardizer);

}  // namespace ymir::supervised
