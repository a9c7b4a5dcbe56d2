#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymir/core/timeseries.hpp"
#include "ymir/ensemble/ensemble.hpp"
#include "ymir/supervised/dataset.hpp"
#include "ymir/supervised/train_config.hpp"
#include "ymir/tensor.hpp"

namespace ymir::supervised {

/// Anything that maps a (raw window, feature window) pair to a probability.
class WindowClassifier {
 public:
  virtual ~WindowClassifier() = default;
  virtual std::size_t window() const = 0;
  virtual std::size_t metric_count() const = 0;
  virtual std::size_t model_count() const = 0;
  virtual const Standardizer& standardizer() const = 0;
  virtual double predict(const Matrix& raw, const Matrix& features) const = 0;
};

struct ClassifierHyper {
  std::size_t window = 32;
  std::size_t d_model = 16;
  std::size_t channels = 8;
  std::size_t metric_count = 0;
  std::size_t model_count = 0;
};

/// Two single-head attention encoders (raw metrics, feature scores) whose
/// outputs are concatenated and compressed by a kernel-3 convolution,
/// mean-pooled over time and mapped to a probability.
///
/// Tensor order per encoder (prefix `raw_` / `feat_`): in_w (m×d), in_b,
/// wq, wk, wv, wo (d×d), ln1_g, ln1_b, ff1_w (d×2d), ff1_b, ff2_w (2d×d),
/// ff2_b, ln2_g, ln2_b; then conv_w (3×2d×c), conv_b (c), out_w (c), out_b (1).
class ClassifierModel final : public WindowClassifier {
 public:
  enum : std::size_t {
    kInW, kInB, kWq, kWk, kWv, kWo, kLn1G, kLn1B, kFf1W, kFf1B, kFf2W, kFf2B, kLn2G, kLn2B,
    kEncoderTensors
  };
  static constexpr std::size_t kRawEncoder = 0;
  static constexpr std::size_t kFeatEncoder = kEncoderTensors;
  static constexpr std::size_t kConvW = 2 * kEncoderTensors;
  static constexpr std::size_t kConvB = kConvW + 1;
  static constexpr std::size_t kOutW = kConvW + 2;
  static constexpr std::size_t kOutB = kConvW + 3;
  static constexpr std::size_t kTensorCount = kConvW + 4;

  ClassifierModel() = default;
  /// Parameters laid out and initialized: weight matrices uniform(±√(6/(fan_in+fan_out))),
  /// biases 0, layer-norm gains 1.
  ClassifierModel(const ClassifierHyper& hyper, std::uint64_t seed);

  std::size_t window() const override { return hyper_.window; }
  std::size_t metric_count() const override { return hyper_.metric_count; }
  std::size_t model_count() const override { return hyper_.model_count; }
  const Standardizer& standardizer() const override { return standardizer_; }
  const ClassifierHyper& hyper() const { return hyper_; }
  std::uint64_t seed() const { return seed_; }

  /// Throws ShapeError on shape mismatch, NumericError on non-finite activations.
  double predict(const Matrix& raw, const Matrix& features) const override;
  double logit(const Matrix& raw, const Matrix& features) const;

  /// Weighted binary cross-entropy of one sample; adds weight·∂loss/∂θ to grad.
  double loss_and_gradient(const Matrix& raw, const Matrix& features, double target, double weight,
                           ParamSet* grad) const;

  ParamSet params;
  std::vector<std::string> metric_names;
  std::vector<std::string> model_ids;
  std::vector<double> loss_history;

  void set_standardizer(Standardizer s) { standardizer_ = std::move(s); }

  nlohmann::json to_json() const;
  static ClassifierModel from_json(const nlohmann::json& j);

 private:
  ClassifierHyper hyper_;
  std::uint64_t seed_ = 0;
  Standardizer standardizer_;
  Matrix positional_;  // sinusoidal encoding, w×d
};

/// Mini-batch SGD with momentum on the (optionally class-balanced) binary
/// cross-entropy. Records the full-dataset loss after every epoch.
ClassifierModel train_classifier(const Dataset& dataset, const TrainConfig& config,
                                 const ClassifierHyper& hyper, const Standardizer& standardizer);

/// Mean binary cross-entropy of a model over a dataset.
double dataset_loss(const WindowClassifier& model, const Dataset& dataset);

/// Per-timestamp probabilities from centered windows; timestamps without a
/// full window take the nearest computed probability.
std::vector<double> predict_series(const WindowClassifier& model, const TimeSeriesSet& ts,
                                   const ensemble::FeatureMatrix& features);

/// Numerically stable binary cross-entropy on a logit.
double bce_with_logit(double logit, double target);
double sigmoid(double x);

}  // namespace ymir::supervised
