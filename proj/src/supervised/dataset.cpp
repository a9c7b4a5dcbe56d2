#include "ymir/supervised/dataset.hpp"

#include "ymir/error.hpp"
#include "ymir/stats.hpp"

namespace ymir::supervised {

Standardizer Standardizer::fit(const TimeSeriesSet& train) {
  Standardizer s;
  for (std::size_t j = 0; j < train.metric_count(); ++j) {
    const auto column = train.metric(j);
    const double sd = stats::population_sd(column);
    s.mean.push_back(stats::mean(column));
    s.scale.push_back(sd < 1e-12 ? 1.0 : sd);
  }
  return s;
}

nlohmann::json Standardizer::to_json() const { return {{"mean", mean}, {"scale", scale}}; }

Standardizer Standardizer::from_json(const nlohmann::json& j) {
  Standardizer s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.scale = j.at("scale").get<std::vector<double>>();
  if (s.mean.size() != s.scale.size()) throw ShapeError("standardizer mean/scale length mismatch");
  return s;
}

Matrix raw_window(const Matrix& values, std::size_t start, std::size_t window,
                  const Standardizer& standardizer) {
  if (standardizer.mean.size() != values.cols) {
    throw ShapeError("standardizer covers " + std::to_string(standardizer.mean.size()) +
                     " metrics, data has " + std::to_string(values.cols));
  }
  Matrix out(window, values.cols);
  for (std::size_t r = 0; r < window; ++r) {
    for (std::size_t c = 0; c < values.cols; ++c) {
      out(r, c) = standardizer.apply(c, values(start + r, c));
    }
  }
  return out;
}

Matrix feature_window(const Matrix& features, std::size_t start, std::size_t window) {
  Matrix out(window, features.cols);
  std::copy(features.data.begin() + static_cast<std::ptrdiff_t>(start * features.cols),
            features.data.begin() + static_cast<std::ptrdiff_t>((start + window) * features.cols),
            out.data.begin());
  return out;
}

Dataset build_dataset(const TimeSeriesSet& ts, const ensemble::FeatureMatrix& features,
                      std::span<const double> targets, std::size_t window,
                      const Standardizer& standardizer) {
  const std::size_t T = ts.length();
  if (features.length() != T || targets.size() != T) {
    throw ShapeError("dataset inputs disagree on length");
  }
  Dataset ds;
  ds.window = window;
  ds.metric_count = ts.metric_count();
  ds.model_count = features.model_count();
  for (const auto& view : sliding_windows(T, window)) {
    ds.samples.push_back({raw_window(ts.values(), view.start, window, standardizer),
                          feature_window(features.values, view.start, window),
                          targets[view.center], view.center});
  }
  return ds;
}

}  // namespace ymir::supervised
