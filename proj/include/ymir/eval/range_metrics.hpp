#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ymir/core/timeseries.hpp"

namespace ymir::eval {

/// Sorted, disjoint, inclusive index ranges.
struct RangeSet {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;

  bool empty() const { return ranges.empty(); }
  bool operator==(const RangeSet&) const = default;
};

enum class PositionalBias { kFlat };

struct MetricParams {
  double alpha_existence = 0.0;
  PositionalBias bias = PositionalBias::kFlat;
  double cardinality_gamma = 1.0;
};

/// Maximal runs of nonzero entries.
RangeSet extract_ranges(std::span<const int> binary);

/// Mean over real ranges of α·existence + (1 − α)·overlap fraction. An empty
/// real set yields 0. Throws ShapeError for ranges outside [0, length) and
/// ContractError for malformed range sets.
double range_recall(const RangeSet& real, const RangeSet& pred, std::size_t length,
                    const MetricParams& params = {});
/// Recall with the roles swapped and α = 0.
double range_precision(const RangeSet& real, const RangeSet& pred, std::size_t length,
                       const MetricParams& params = {});
double range_f1(double precision, double recall);

struct CurvePoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct EvalReport {
  double best_f1 = 0.0;
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  std::vector<CurvePoint> curve;

  nlohmann::json to_json() const;
};

/// Sweeps thresholds θ, predicting anomalies where score ≥ θ, and keeps the
/// first threshold reaching the highest range F1.
///
/// With threshold_count > 0 the thresholds are evenly spaced strictly inside
/// (min, max). With threshold_count == 0 every distinct score above the
/// minimum is tried, which makes the result depend only on the score order.
/// Constant scores yield an empty curve and F1 0. Throws ContractError when
/// truth is not fully labeled.
EvalReport best_range_f1(std::span<const double> scores, const LabelSeries& truth,
                         std::size_t threshold_count = 100, const MetricParams& params = {});

}  // namespace ymir::eval
