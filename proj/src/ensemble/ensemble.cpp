#include "ymir/ensemble/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "ymir/ensemble/esd.hpp"
#include "ymir/error.hpp"
#include "ymir/stats.hpp"

namespace ymir::ensemble {

Normalizer::Normalizer(std::vector<std::string> model_ids, std::vector<QuantileRange> ranges)
    : ids_(std::move(model_ids)), ranges_(std::move(ranges)) {
  if (ids_.size() != ranges_.size()) throw ShapeError("normalizer ids and ranges differ in length");
  for (const auto& r : ranges_) {
    if (!(r.q01 <= r.q99)) throw DataError("normalizer range with q01 > q99");
  }
}

std::size_t Normalizer::index_of(const std::string& model_id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), model_id);
  if (it == ids_.end()) throw RegistryError("normalizer has no model '" + model_id + "'");
  return static_cast<std::size_t>(it - ids_.begin());
}

double Normalizer::normalize(std::size_t model, double raw) const {
  const auto& r = ranges_.at(model);
  const double span = r.q99 - r.q01;
  if (span < kMinSpan) return 0.0;
  return std::clamp((raw - r.q01) / span, 0.0, 1.0);
}

nlohmann::json Normalizer::to_json() const {
  nlohmann::json models = nlohmann::json::array();
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    models.push_back({{"model_id", ids_[i]}, {"q01", ranges_[i].q01}, {"q99", ranges_[i].q99}});
  }
  return {{"models", std::move(models)}};
}

Normalizer Normalizer::from_json(const nlohmann::json& j) {
  std::vector<std::string> ids;
  std::vector<QuantileRange> ranges;
  for (const auto& m : j.at("models")) {
    ids.push_back(m.at("model_id").get<std::string>());
    ranges.push_back({m.at("q01").get<double>(), m.at("q99").get<double>()});
  }
  return Normalizer(std::move(ids), std::move(ranges));
}

Normalizer fit_normalizer(std::span<const RawScoreSeries> raw) {
  std::vector<std::string> ids;
  std::vector<QuantileRange> ranges;
  for (const auto& series : raw) {
    if (series.scores.empty()) throw SizeError("cannot normalize empty score series '" + series.model_id + "'");
    ids.push_back(series.model_id);
    ranges.push_back({stats::percentile(series.scores, 0.01), stats::percentile(series.scores, 0.99)});
  }
  return Normalizer(std::move(ids), std::move(ranges));
}

std::vector<double> normalize_scores(const RawScoreSeries& raw, const Normalizer& norm) {
  const std::size_t model = norm.index_of(raw.model_id);
  std::vector<double> out(raw.scores.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = norm.normalize(model, raw.scores[t]);
  return out;
}

FeatureMatrix build_feature_matrix(std::span<const RawScoreSeries> raw, const Normalizer& norm) {
  if (raw.empty()) throw ShapeError("feature matrix needs at least one model");
  const std::size_t T = raw.front().scores.size();
  FeatureMatrix fm;
  fm.values = Matrix(T, raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (raw[j].scores.size() != T) throw ShapeError("raw score series differ in length");
    fm.model_ids.push_back(raw[j].model_id);
    const auto column = normalize_scores(raw[j], norm);
    for (std::size_t t = 0; t < T; ++t) fm.values(t, j) = column[t];
  }
  return fm;
}

void EnsembleWeights::validate() const {
  for (double v : w) {
    if (!std::isfinite(v) || v < 0.0) throw ParameterError("ensemble weights must be finite and nonnegative");
  }
  if (!(sum() > 0.0)) throw ParameterError("ensemble weights must not all be zero");
}

double EnsembleWeights::sum() const {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

FeatureMatrix apply_weights(const FeatureMatrix& features, const EnsembleWeights& weights) {
  if (weights.w.size() != features.model_count()) {
    throw ShapeError("got " + std::to_string(weights.w.size()) + " weights for " +
                     std::to_string(features.model_count()) + " models");
  }
  for (double v : weights.w) {
    if (!std::isfinite(v) || v < 0.0) throw ParameterError("ensemble weights must be finite and nonnegative");
  }
  FeatureMatrix out = features;
  for (std::size_t t = 0; t < out.length(); ++t) {
    for (std::size_t j = 0; j < out.model_count(); ++j) out.values(t, j) *= weights.w[j];
  }
  return out;
}

double aggregate_row(std::span<const double> weighted_row, double weight_sum) {
  double acc = 0.0;
  for (double v : weighted_row) acc += v;
  return std::clamp(acc / weight_sum, 0.0, 1.0);
}

std::vector<double> aggregate_weighted(const FeatureMatrix& weighted, const EnsembleWeights& weights) {
  if (weights.w.size() != weighted.model_count()) throw ShapeError("weight count differs from model count");
  weights.validate();
  const double total = weights.sum();
  std::vector<double> out(weighted.length());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = aggregate_row(weighted.values.row(t), total);
  return out;
}

nlohmann::json UnsupervisedResult::to_json() const {
  nlohmann::json conf = nlohmann::json::object();
  for (const auto& [index, c] : confidence) conf[std::to_string(index)] = c;
  return {{"flagged", flagged}, {"confidence", std::move(conf)}};
}

UnsupervisedResult detect_unsupervised(const FeatureMatrix& features, const EnsembleWeights& weights,
                                       double alpha, std::optional<std::size_t> max_outliers) {
  UnsupervisedResult result;
  result.aggregate_scores = aggregate_weighted(apply_weights(features, weights), weights);
  result.flagged = generalized_esd(result.aggregate_scores, alpha, max_outliers);
  for (std::size_t t : result.flagged) result.confidence[t] = result.aggregate_scores[t];
  return result;
}

}  // namespace ymir::ensemble
