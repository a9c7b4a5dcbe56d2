#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ymir/matrix.hpp"

namespace ymir {

/// n aligned metrics sampled on a uniform integer-epoch grid.
///
/// `values` is T×n, row t holding every metric at timestamps[t]. Construction
/// through `make` validates the grid and metric names; NaN cells are allowed
/// until `impute_missing` has run.
class TimeSeriesSet {
 public:
  TimeSeriesSet() = default;

  static TimeSeriesSet make(std::vector<std::int64_t> timestamps, Matrix values,
                            std::vector<std::string> metric_names);

  std::size_t length() const { return timestamps_.size(); }
  std::size_t metric_count() const { return names_.size(); }
  /// Grid spacing in seconds; 0 when T == 1.
  std::int64_t step() const { return step_; }

  const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
  const Matrix& values() const { return values_; }
  const std::vector<std::string>& metric_names() const { return names_; }

  double at(std::size_t t, std::size_t metric) const { return values_(t, metric); }
  std::vector<double> metric(std::size_t j) const { return values_.column(j); }

  /// Rows [begin, end) as a new set sharing the metric names.
  TimeSeriesSet slice(std::size_t begin, std::size_t end) const;

  bool all_finite() const;

  bool operator==(const TimeSeriesSet&) const = default;

 private:
  std::vector<std::int64_t> timestamps_;
  Matrix values_;
  std::vector<std::string> names_;
  std::int64_t step_ = 0;
};

/// Human feedback labels on the grid of a TimeSeriesSet.
struct LabelSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<int> labels;  // 0/1, meaningful where mask is true
  std::vector<bool> mask;

  std::size_t length() const { return timestamps.size(); }
  std::size_t labeled_count() const;
  bool fully_labeled() const { return labeled_count() == length(); }

  /// Every point labeled with the given values.
  static LabelSeries full(std::vector<std::int64_t> timestamps, std::vector<int> labels);
  /// No point labeled.
  static LabelSeries empty(std::vector<std::int64_t> timestamps);
};

struct WindowView {
  std::size_t start = 0;
  std::size_t length = 0;
  std::size_t center = 0;

  bool operator==(const WindowView&) const = default;
};

/// Windows at starts 0, stride, 2·stride, ... with start + w ≤ T and
/// center = start + ⌊w/2⌋. Throws SizeError when w > T or w == 0.
std::vector<WindowView> sliding_windows(std::size_t length, std::size_t window,
                                        std::size_t stride = 1);

/// Linear interpolation between finite neighbors, nearest-value fill at the
/// edges. Throws DataError for a metric without any finite value.
TimeSeriesSet impute_missing(const TimeSeriesSet& ts);

}  // namespace ymir
