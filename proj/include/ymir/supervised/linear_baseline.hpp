#pragma once

#include <cstddef>

#include <json.hpp>

#include "ymir/supervised/classifier.hpp"

namespace ymir::supervised {

/// Logistic regression on the time-means of the raw and feature windows.
/// Tensors: weight (n + k), bias (1).
class LinearBaseline final : public WindowClassifier {
 public:
  LinearBaseline() = default;
  LinearBaseline(std::size_t window, std::size_t metric_count, std::size_t model_count);

  std::size_t window() const override { return window_; }
  std::size_t metric_count() const override { return metric_count_; }
  std::size_t model_count() const override { return model_count_; }
  const Standardizer& standardizer() const override { return standardizer_; }
  void set_standardizer(Standardizer s) { standardizer_ = std::move(s); }

  std::vector<double> pooled_features(const Matrix& raw, const Matrix& features) const;
  double predict(const Matrix& raw, const Matrix& features) const override;

  /// Mean BCE over the dataset; writes the gradient of that mean into grad.
  double loss_and_gradient(const Dataset& dataset, ParamSet* grad) const;

  ParamSet params;
  std::vector<double> loss_history;

  nlohmann::json to_json() const;

 private:
  std::size_t window_ = 0;
  std::size_t metric_count_ = 0;
  std::size_t model_count_ = 0;
  Standardizer standardizer_;
};

/// Full-batch gradient descent from zero weights for config.epochs iterations.
LinearBaseline train_linear_baseline(const Dataset& dataset, const TrainConfig& config,
                                     const Standardizer& standardizer);

}  // namespace ymir::supervised
