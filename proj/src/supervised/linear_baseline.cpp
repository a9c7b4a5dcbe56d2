#include "ymir/supervised/linear_baseline.hpp"

#include <cmath>

#include "ymir/error.hpp"

namespace ymir::supervised {

LinearBaseline::LinearBaseline(std::size_t window, std::size_t metric_count, std::size_t model_count)
    : window_(window), metric_count_(metric_count), model_count_(model_count) {
  params.tensors = {Tensor::zeros("weight", {metric_count + model_count}), Tensor::zeros("bias", {1})};
}

std::vector<double> LinearBaseline::pooled_features(const Matrix& raw, const Matrix& features) const {
  if (raw.rows != window_ || raw.cols != metric_count_ || features.rows != window_ ||
      features.cols != model_count_) {
    throw ShapeError("linear baseline window shape mismatch");
  }
  std::vector<double> f(metric_count_ + model_count_, 0.0);
  for (std::size_t t = 0; t < window_; ++t) {
    for (std::size_t j = 0; j < metric_count_; ++j) f[j] += raw(t, j);
    for (std::size_t j = 0; j < model_count_; ++j) f[metric_count_ + j] += features(t, j);
  }
  for (auto& v : f) v /= static_cast<double>(window_);
  return f;
}

namespace {

double affine(const ParamSet& p, const std::vector<double>& f) {
  double z = p[1].values[0];
  for (std::size_t j = 0; j < f.size(); ++j) z += p[0].values[j] * f[j];
  return z;
}

}  // namespace

double LinearBaseline::predict(const Matrix& raw, const Matrix& features) const {
  return sigmoid(affine(params, pooled_features(raw, features)));
}

double LinearBaseline::loss_and_gradient(const Dataset& dataset, ParamSet* grad) const {
  if (dataset.samples.empty()) throw SizeError("empty dataset");
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  if (grad != nullptr) {
    for (auto& t : grad->tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
  }
  double total = 0.0;
  for (const auto& s : dataset.samples) {
    const auto f = pooled_features(s.raw, s.features);
    const double z = affine(params, f);
    total += bce_with_logit(z, s.target);
    if (grad == nullptr) continue;
    const double dz = (sigmoid(z) - s.target) * inv_n;
    for (std::size_t j = 0; j < f.size(); ++j) (*grad)[0].values[j] += dz * f[j];
    (*grad)[1].values[0] += dz;
  }
  return total * inv_n;
}

nlohmann::json LinearBaseline::to_json() const {
  return {{"window", window_},
          {"metric_count", metric_count_},
          {"model_count", model_count_},
          {"standardizer", standardizer_.to_json()},
          {"loss_history", loss_history},
          {"params", params.to_json()}};
}

LinearBaseline train_linear_baseline(const Dataset& dataset, const TrainConfig& config,
                                     const Standardizer& standardizer) {
  config.validate();
  if (dataset.samples.empty()) throw SizeError("cannot train on an empty dataset");
  LinearBaseline model(dataset.window, dataset.metric_count, dataset.model_count);
  model.set_standardizer(standardizer);
  ParamSet grad = model.params.zeros_like();
  for (std::size_t it = 0; it < config.epochs; ++it) {
    const double loss = model.loss_and_gradient(dataset, &grad);
    if (!std::isfinite(loss)) {
      throw NumericError("linear baseline diverged at iteration " + std::to_string(it + 1));
    }
    model.loss_history.push_back(loss);
    for (std::size_t i = 0; i < model.params.total_size(); ++i) {
      model.params.flat(i) -= config.learning_rate * grad.flat(i);
    }
  }
  return model;
}

}  // namespace ymir::supervised
