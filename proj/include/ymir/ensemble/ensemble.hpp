#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymir/detectors/detector.hpp"
#include "ymir/matrix.hpp"

namespace ymir::ensemble {

using detectors::RawScoreSeries;

struct QuantileRange {
  double q01 = 0.0;
  double q99 = 0.0;
};

/// Per-model robust range of training raw scores.
class Normalizer {
 public:
  static constexpr double kMinSpan = 1e-12;

  Normalizer() = default;
  Normalizer(std::vector<std::string> model_ids, std::vector<QuantileRange> ranges);

  const std::vector<std::string>& model_ids() const { return ids_; }
  const std::vector<QuantileRange>& ranges() const { return ranges_; }
  /// Throws RegistryError for an unknown id.
  std::size_t index_of(const std::string& model_id) const;

  /// clip((raw − q01)/(q99 − q01), 0, 1); 0 when the range is degenerate.
  double normalize(std::size_t model, double raw) const;

  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json& j);

 private:
  std::vector<std::string> ids_;
  std::vector<QuantileRange> ranges_;
};

Normalizer fit_normalizer(std::span<const RawScoreSeries> raw);

std::vector<double> normalize_scores(const RawScoreSeries& raw, const Normalizer& norm);

/// T×k normalized feature scores, columns in detector order.
struct FeatureMatrix {
  std::vector<std::string> model_ids;
  Matrix values;

  std::size_t length() const { return values.rows; }
  std::size_t model_count() const { return values.cols; }
};

/// Normalizes each raw series into one column; all series must share a length.
FeatureMatrix build_feature_matrix(std::span<const RawScoreSeries> raw, const Normalizer& norm);

struct EnsembleWeights {
  std::vector<double> w;

  static EnsembleWeights uniform(std::size_t k) { return {std::vector<double>(k, 1.0)}; }
  /// Throws ParameterError for negative/non-finite entries or zero sum.
  void validate() const;
  double sum() const;
};

/// Column j multiplied by w_j.
FeatureMatrix apply_weights(const FeatureMatrix& features, const EnsembleWeights& weights);

/// a_t = Σ_j (weighted)_{t,j} / Σ_j w_j.
std::vector<double> aggregate_weighted(const FeatureMatrix& weighted, const EnsembleWeights& weights);
double aggregate_row(std::span<const double> weighted_row, double weight_sum);

struct UnsupervisedResult {
  std::vector<std::size_t> flagged;
  std::map<std::size_t, double> confidence;
  std::vector<double> aggregate_scores;

  nlohmann::json to_json() const;
};

/// Weighted aggregate followed by the generalized ESD test; confidence of a
/// flagged index is its aggregate score.
UnsupervisedResult detect_unsupervised(const FeatureMatrix& features, const EnsembleWeights& weights,
                                       double alpha = 0.05,
                                       std::optional<std::size_t> max_outliers = std::nullopt);

}  // namespace ymir::ensemble
