#include "ymir/core/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ymir/error.hpp"

namespace ymir {

TimeSeriesSet TimeSeriesSet::make(std::vector<std::int64_t> timestamps, Matrix values,
                                  std::vector<std::string> metric_names) {
  if (timestamps.empty()) throw StructureError("time series has no rows");
  if (metric_names.empty()) throw StructureError("time series has no metrics");
  if (values.rows != timestamps.size() || values.cols != metric_names.size()) {
    throw StructureError("value matrix is " + std::to_string(values.rows) + "x" +
                         std::to_string(values.cols) + ", expected " +
                         std::to_string(timestamps.size()) + "x" +
                         std::to_string(metric_names.size()));
  }
  std::set<std::string> seen;
  for (const auto& name : metric_names) {
    if (name.empty()) throw StructureError("empty metric name");
    if (!seen.insert(name).second) throw StructureError("duplicate metric name '" + name + "'");
  }
  std::int64_t step = 0;
  if (timestamps.size() > 1) {
    step = timestamps[1] - timestamps[0];
    if (step <= 0) throw StructureError("timestamps not strictly increasing");
    for (std::size_t t = 2; t < timestamps.size(); ++t) {
      const std::int64_t d = timestamps[t] - timestamps[t - 1];
      if (d <= 0) throw StructureError("timestamps not strictly increasing");
      if (d != step) {
        throw StructureError("non-uniform spacing at timestamp " + std::to_string(timestamps[t]));
      }
    }
  }
  TimeSeriesSet ts;
  ts.timestamps_ = std::move(timestamps);
  ts.values_ = std::move(values);
  ts.names_ = std::move(metric_names);
  ts.step_ = step;
  return ts;
}

TimeSeriesSet TimeSeriesSet::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > length()) throw SizeError("invalid slice range");
  Matrix v(end - begin, metric_count());
  std::copy(values_.data.begin() + static_cast<std::ptrdiff_t>(begin * values_.cols),
            values_.data.begin() + static_cast<std::ptrdiff_t>(end * values_.cols),
            v.data.begin());
  TimeSeriesSet out;
  out.timestamps_.assign(timestamps_.begin() + static_cast<std::ptrdiff_t>(begin),
                         timestamps_.begin() + static_cast<std::ptrdiff_t>(end));
  out.values_ = std::move(v);
  out.names_ = names_;
  out.step_ = end - begin > 1 ? step_ : 0;
  return out;
}

bool TimeSeriesSet::all_finite() const {
  return std::all_of(values_.data.begin(), values_.data.end(),
                     [](double v) { return std::isfinite(v); });
}

std::size_t LabelSeries::labeled_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

LabelSeries LabelSeries::full(std::vector<std::int64_t> timestamps, std::vector<int> labels) {
  if (labels.size() != timestamps.size()) throw ShapeError("label count differs from timestamps");
  LabelSeries out;
  out.mask.assign(timestamps.size(), true);
  out.timestamps = std::move(timestamps);
  out.labels = std::move(labels);
  return out;
}

LabelSeries LabelSeries::empty(std::vector<std::int64_t> timestamps) {
  LabelSeries out;
  out.labels.assign(timestamps.size(), 0);
  out.mask.assign(timestamps.size(), false);
  out.timestamps = std::move(timestamps);
  return out;
}

std::vector<WindowView> sliding_windows(std::size_t length, std::size_t window,
                                        std::size_t stride) {
  if (window == 0) throw SizeError("window size must be at least 1");
  if (stride == 0) throw SizeError("stride must be at least 1");
  if (window > length) {
    throw SizeError("window " + std::to_string(window) + " exceeds length " +
                    std::to_string(length));
  }
  std::vector<WindowView> out;
  out.reserve((length - window) / stride + 1);
  for (std::size_t start = 0; start + window <= length; start += stride) {
    out.push_back({start, window, start + window / 2});
  }
  return out;
}

TimeSeriesSet impute_missing(const TimeSeriesSet& ts) {
  Matrix values = ts.values();
  const std::size_t T = values.rows;
  for (std::size_t j = 0; j < values.cols; ++j) {
    std::vector<std::size_t> finite;
    for (std::size_t t = 0; t < T; ++t) {
      if (std::isfinite(values(t, j))) finite.push_back(t);
    }
    if (finite.empty()) {
      throw DataError("metric '" + ts.metric_names()[j] + "' has no finite values");
    }
    for (std::size_t t = 0; t < finite.front(); ++t) values(t, j) = values(finite.front(), j);
    for (std::size_t t = finite.back() + 1; t < T; ++t) values(t, j) = values(finite.back(), j);
    for (std::size_t k = 0; k + 1 < finite.size(); ++k) {
      const std::size_t a = finite[k];
      const std::size_t b = finite[k + 1];
      const double va = values(a, j);
      const double vb = values(b, j);
      for (std::size_t t = a + 1; t < b; ++t) {
        const double frac = static_cast<double>(t - a) / static_cast<double>(b - a);
        values(t, j) = va + frac * (vb - va);
      }
    }
  }
  return TimeSeriesSet::make(ts.timestamps(), std::move(values), ts.metric_names());
}

}  // namespace ymir
