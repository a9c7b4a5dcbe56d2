#include "ymir/eval/range_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "ymir/error.hpp"

namespace ymir::eval {
namespace {

void check_ranges(const RangeSet& set, std::size_t length) {
  for (std::size_t i = 0; i < set.ranges.size(); ++i) {
    const auto [start, end] = set.ranges[i];
    if (start > end) throw ContractError("range start exceeds its end");
    if (end >= length) {
      throw ShapeError("range (" + std::to_string(start) + "," + std::to_string(end) +
                       ") lies outside a series of length " + std::to_string(length));
    }
    if (i > 0 && start <= set.ranges[i - 1].second) {
      throw ContractError("ranges must be sorted and disjoint");
    }
  }
}

// Mean over `base` ranges of the existence/overlap reward against `other`.
double coverage(const RangeSet& base, const RangeSet& other, double alpha) {
  if (base.empty()) return 0.0;
  double total = 0.0;
  std::size_t j = 0;
  for (const auto& [start, end] : base.ranges) {
    while (j < other.ranges.size() && other.ranges[j].second < start) ++j;
    std::size_t covered = 0;
    for (std::size_t k = j; k < other.ranges.size() && other.ranges[k].first <= end; ++k) {
      const std::size_t lo = std::max(start, other.ranges[k].first);
      const std::size_t hi = std::min(end, other.ranges[k].second);
      covered += hi - lo + 1;
    }
    const double existence = covered > 0 ? 1.0 : 0.0;
    const double overlap = static_cast<double>(covered) / static_cast<double>(end - start + 1);
    total += alpha * existence + (1.0 - alpha) * overlap;
  }
  return total / static_cast<double>(base.ranges.size());
}

void check_params(const MetricParams& params) {
  if (!(params.alpha_existence >= 0.0 && params.alpha_existence <= 1.0)) {
    throw ParameterError("alpha_existence must lie in [0, 1]");
  }
  if (params.cardinality_gamma != 1.0) {
    throw ParameterError("only the constant cardinality factor 1 is supported");
  }
}

}  // namespace

RangeSet extract_ranges(std::span<const int> binary) {
  RangeSet out;
  std::size_t t = 0;
  while (t < binary.size()) {
    if (binary[t] == 0) {
      ++t;
      continue;
    }
    const std::size_t start = t;
    while (t < binary.size() && binary[t] != 0) ++t;
    out.ranges.emplace_back(start, t - 1);
  }
  return out;
}

double range_recall(const RangeSet& real, const RangeSet& pred, std::size_t length,
                    const MetricParams& params) {
  check_params(params);
  check_ranges(real, length);
  check_ranges(pred, length);
  return coverage(real, pred, params.alpha_existence);
}

double range_precision(const RangeSet& real, const RangeSet& pred, std::size_t length,
                       const MetricParams& params) {
  check_params(params);
  check_ranges(real, length);
  check_ranges(pred, length);
  return coverage(pred, real, 0.0);
}

double range_f1(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

nlohmann::json EvalReport::to_json() const {
  auto points = nlohmann::json::array();
  for (const auto& p : curve) {
    points.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}});
  }
  return {{"best_f1", best_f1}, {"threshold", threshold}, {"precision", precision},
          {"recall", recall},   {"curve", points}};
}

EvalReport best_range_f1(std::span<const double> scores, const LabelSeries& truth,
                         std::size_t threshold_count, const MetricParams& params) {
  check_params(params);
  if (scores.size() != truth.length()) {
    throw ShapeError("scores have length " + std::to_string(scores.size()) + ", truth " +
                     std::to_string(truth.length()));
  }
  if (!truth.fully_labeled()) throw ContractError("evaluation requires a label at every point");
  if (scores.empty()) throw SizeError("cannot evaluate an empty series");
  for (double s : scores) {
    if (!std::isfinite(s)) throw DataError("scores must be finite");
  }

  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it, hi = *hi_it;
  std::vector<double> thresholds;
  if (threshold_count > 0) {
    if (hi > lo) {
      for (std::size_t i = 1; i <= threshold_count; ++i) {
        thresholds.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(threshold_count + 1));
      }
    }
  } else {
    thresholds.assign(scores.begin(), scores.end());
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    thresholds.erase(thresholds.begin());
  }

  const RangeSet real = extract_ranges(truth.labels);
  EvalReport report;
  std::vector<int> binary(scores.size());
  for (double theta : thresholds) {
    for (std::size_t t = 0; t < scores.size(); ++t) binary[t] = scores[t] >= theta ? 1 : 0;
    const RangeSet pred = extract_ranges(binary);
    CurvePoint p;
    p.threshold = theta;
    p.recall = coverage(real, pred, params.alpha_existence);
    p.precision = coverage(pred, real, 0.0);
    p.f1 = range_f1(p.precision, p.recall);
    if (report.curve.empty() || p.f1 > report.best_f1) {
      report.best_f1 = p.f1;
      report.threshold = p.threshold;
      report.precision = p.precision;
      report.recall = p.recall;
    }
    report.curve.push_back(p);
  }
  return report;
}

}  // namespace ymir::eval
