#include "ymir/pipeline/detection.hpp"

#include <algorithm>
#include <cmath>

#include "ymir/core/csv.hpp"
#include "ymir/error.hpp"
#include "ymir/supervised/dataset.hpp"

namespace ymir::pipeline {
namespace {

std::size_t half_window(const DetectionModel& m) { return m.classifier ? m.classifier->window() / 2 : 0; }

std::vector<double> normalize_row(const DetectionModel& m, std::span<const double> raw) {
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) out[j] = m.normalizer.normalize(j, raw[j]);
  return out;
}

double aggregate_of(const DetectionModel& m, const std::vector<double>& features, double weight_sum) {
  std::vector<double> weighted(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) weighted[j] = m.weights.w[j] * features[j];
  return ensemble::aggregate_row(weighted, weight_sum);
}

bool last_is_outlier(const ensemble::GeneralizedEsd& esd, std::span<const double> window) {
  const auto outliers = esd.run(window);
  return !outliers.empty() && outliers.back() == window.size() - 1;
}

void check_model(const DetectionModel& m) {
  const std::size_t k = m.detectors.size();
  if (m.model_ids.size() != k || m.normalizer.model_ids() != m.model_ids || m.weights.w.size() != k) {
    throw ManifestError("detectors, normalizer and weights disagree on the model list");
  }
  m.weights.validate();
  if (m.classifier && (m.classifier->model_count() != k ||
                       m.classifier->metric_count() != m.metric_names.size())) {
    throw ManifestError("classifier input shape does not match the detector set");
  }
}

}  // namespace

RowContext DetectionModel::context() const {
  RowContext c;
  for (const auto& d : detectors) {
    c.detector_history = std::max(c.detector_history, d->context().history);
    c.detector_lookahead = std::max(c.detector_lookahead, d->context().lookahead);
  }
  const std::size_t half = half_window(*this);
  const std::size_t after = classifier ? classifier->window() - 1 - half : 0;
  c.history = c.detector_history + std::max(esd_window - 1, half);
  c.lookahead = c.detector_lookahead + after;
  return c;
}

void DetectionModel::check_compatible(const TimeSeriesSet& ts) const {
  if (ts.metric_names() != metric_names) {
    std::string expected, got;
    for (const auto& n : metric_names) expected += (expected.empty() ? "" : ",") + n;
    for (const auto& n : ts.metric_names()) got += (got.empty() ? "" : ",") + n;
    throw ManifestError("model expects metrics [" + expected + "], data has [" + got + "]");
  }
}

std::vector<ScoreRow> detect_offline(const DetectionModel& model, const TimeSeriesSet& ts) {
  check_model(model);
  model.check_compatible(ts);
  if (!ts.all_finite()) throw DataError("detection input contains missing values");
  const RowContext ctx = model.context();
  const std::size_t T = ts.length();
  const std::size_t k = model.detectors.size();
  if (T < ctx.max_window()) return {};

  std::vector<std::vector<double>> raw(k);
  for (std::size_t j = 0; j < k; ++j) raw[j] = model.detectors[j]->score(ts);

  Matrix features(T, k);
  std::vector<double> aggregates(T);
  const double weight_sum = model.weights.sum();
  std::vector<double> raw_row(k);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < k; ++j) raw_row[j] = raw[j][t];
    const auto f = normalize_row(model, raw_row);
    std::copy(f.begin(), f.end(), features.row(t).begin());
    aggregates[t] = aggregate_of(model, f, weight_sum);
  }

  const ensemble::GeneralizedEsd esd(model.esd_window, model.esd_alpha, model.esd_max_outliers);
  const std::size_t half = half_window(model);
  std::vector<ScoreRow> rows;
  for (std::size_t t = ctx.history; t + ctx.lookahead < T; ++t) {
    ScoreRow row;
    row.index = t;
    row.timestamp = ts.timestamps()[t];
    row.features.assign(features.row(t).begin(), features.row(t).end());
    row.aggregate = aggregates[t];
    row.flag = last_is_outlier(esd, std::span<const double>(aggregates).subspan(t + 1 - model.esd_window,
                                                                                 model.esd_window));
    if (model.classifier) {
      const auto& c = *model.classifier;
      row.classifier = c.predict(supervised::raw_window(ts.values(), t - half, c.window(), c.standardizer()),
                                 supervised::feature_window(features, t - half, c.window()));
    } else {
      row.classifier = NAN;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

StreamContext::StreamContext(const DetectionModel& model)
    : model_(model),
      ctx_(model.context()),
      esd_(model.esd_window, model.esd_alpha, model.esd_max_outliers),
      weight_sum_(model.weights.sum()) {
  check_model(model);
  if (model.step > 0) step_ = model.step;
}

std::vector<ScoreRow> StreamContext::append(const TimeSeriesSet& batch) {
  if (batch.metric_names() != model_.metric_names) {
    throw StreamError("batch metrics differ from the model's");
  }
  if (!batch.all_finite()) throw StreamError("batch contains missing values");
  std::optional<std::int64_t> step = step_;
  std::optional<std::int64_t> last;
  if (!timestamps_.empty()) last = timestamps_.back();
  for (std::int64_t ts : batch.timestamps()) {
    if (last) {
      if (!step) step = ts - *last;
      if (*step <= 0 || ts - *last != *step) {
        throw StreamError("timestamp " + std::to_string(ts) + " does not follow " + std::to_string(*last) +
                          " on the stream grid");
      }
    }
    last = ts;
  }
  step_ = step;

  std::vector<ScoreRow> out;
  for (std::size_t t = 0; t < batch.length(); ++t) push_point(batch.timestamps()[t], batch.values().row(t), out);
  return out;
}

void StreamContext::push_point(std::int64_t timestamp, std::span<const double> values,
                               std::vector<ScoreRow>& out) {
  const std::size_t j = next_index_++;
  const std::size_t keep = ctx_.max_window();
  timestamps_.push_back(timestamp);
  values_.emplace_back(values.begin(), values.end());
  if (timestamps_.size() > keep) {
    timestamps_.pop_front();
    values_.pop_front();
  }
  const std::size_t n = model_.metric_names.size();
  const std::size_t buffer_base = j + 1 - timestamps_.size();

  const std::size_t hd = ctx_.detector_history, ld = ctx_.detector_lookahead;
  if (j >= ld && j - ld >= hd) {
    const std::size_t i = j - ld;
    const std::size_t span_len = hd + ld + 1;
    const std::size_t first = i - hd - buffer_base;
    std::vector<std::int64_t> stamps(timestamps_.begin() + static_cast<std::ptrdiff_t>(first),
                                     timestamps_.begin() + static_cast<std::ptrdiff_t>(first + span_len));
    Matrix slice(span_len, n);
    for (std::size_t r = 0; r < span_len; ++r) {
      std::copy(values_[first + r].begin(), values_[first + r].end(), slice.row(r).begin());
    }
    const auto segment = TimeSeriesSet::make(std::move(stamps), std::move(slice), model_.metric_names);
    std::vector<double> raw(model_.detectors.size());
    for (std::size_t d = 0; d < raw.size(); ++d) raw[d] = model_.detectors[d]->score_range(segment, hd, hd + 1)[0];
    auto f = normalize_row(model_, raw);
    if (features_.empty()) feature_base_ = i;
    aggregates_.push_back(aggregate_of(model_, f, weight_sum_));
    features_.push_back(std::move(f));
    if (features_.size() > keep) {
      features_.pop_front();
      aggregates_.pop_front();
      ++feature_base_;
    }
  }

  if (j < ctx_.lookahead || j - ctx_.lookahead < ctx_.history) return;
  const std::size_t t = j - ctx_.lookahead;
  ScoreRow row;
  row.index = t;
  row.timestamp = timestamps_[t - buffer_base];
  row.features = features_[t - feature_base_];
  row.aggregate = aggregates_[t - feature_base_];

  const std::size_t E = model_.esd_window;
  std::vector<double> window(aggregates_.begin() + static_cast<std::ptrdiff_t>(t + 1 - E - feature_base_),
                             aggregates_.begin() + static_cast<std::ptrdiff_t>(t + 1 - feature_base_));
  row.flag = last_is_outlier(esd_, window);

  if (model_.classifier) {
    const auto& c = *model_.classifier;
    const std::size_t w = c.window();
    const std::size_t start = t - half_window(model_);
    Matrix raw_rows(w, n), feat_rows(w, model_.detectors.size());
    for (std::size_t r = 0; r < w; ++r) {
      const auto& v = values_[start + r - buffer_base];
      std::copy(v.begin(), v.end(), raw_rows.row(r).begin());
      const auto& f = features_[start + r - feature_base_];
      std::copy(f.begin(), f.end(), feat_rows.row(r).begin());
    }
    row.classifier = c.predict(supervised::raw_window(raw_rows, 0, w, c.standardizer()), feat_rows);
  } else {
    row.classifier = NAN;
  }
  ++emitted_;
  out.push_back(std::move(row));
}

std::string scores_csv_header(const std::vector<std::string>& model_ids) {
  std::string h = "timestamp";
  for (const auto& id : model_ids) h += "," + id;
  return h + ",aggregate,classifier,flag";
}

void write_score_row(std::ostream& out, const ScoreRow& row) {
  out << row.timestamp;
  for (double v : row.features) out << ',' << format_double(v);
  out << ',' << format_double(row.aggregate) << ',' << format_double(row.classifier) << ','
      << (row.flag ? 1 : 0) << '\n';
}

void write_scores_csv(std::ostream& out, const std::vector<std::string>& model_ids,
                      const std::vector<ScoreRow>& rows) {
  out << scores_csv_header(model_ids) << '\n';
  for (const auto& r : rows) write_score_row(out, r);
}

nlohmann::json detection_result_json(const std::vector<ScoreRow>& rows) {
  nlohmann::json flagged = nlohmann::json::array(), stamps = nlohmann::json::array();
  nlohmann::json confidence = nlohmann::json::object();
  for (const auto& r : rows) {
    if (!r.flag) continue;
    flagged.push_back(r.index);
    stamps.push_back(r.timestamp);
    confidence[std::to_string(r.index)] = r.aggregate;
  }
  return {{"rows", rows.size()},
          {"first_index", rows.empty() ? nlohmann::json(nullptr) : nlohmann::json(rows.front().index)},
          {"flagged", flagged},
          {"flagged_timestamps", stamps},
          {"confidence", confidence}};
}

}  // namespace ymir::pipeline
