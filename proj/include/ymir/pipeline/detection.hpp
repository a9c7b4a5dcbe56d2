#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymir/core/timeseries.hpp"
#include "ymir/detectors/detector.hpp"
#include "ymir/ensemble/ensemble.hpp"
#include "ymir/ensemble/esd.hpp"
#include "ymir/supervised/classifier.hpp"

namespace ymir::pipeline {

/// Point counts a detection row needs on either side of its timestamp.
struct RowContext {
  std::size_t detector_history = 0;
  std::size_t detector_lookahead = 0;
  std::size_t history = 0;    // H: rows before this index are never emitted
  std::size_t lookahead = 0;  // L: a row is final once L later points exist

  /// W_max = H + L + 1.
  std::size_t max_window() const { return history + lookahead + 1; }
};

/// Frozen models needed to score new data.
struct DetectionModel {
  std::vector<std::string> metric_names;
  std::int64_t step = 0;  // grid spacing of the training data
  std::vector<std::string> model_ids;
  std::vector<detectors::DetectorPtr> detectors;
  ensemble::Normalizer normalizer;
  ensemble::EnsembleWeights weights;
  std::optional<supervised::ClassifierModel> classifier;
  std::size_t esd_window = 256;
  double esd_alpha = 0.05;
  std::size_t esd_max_outliers = 6;

  RowContext context() const;
  /// Throws ManifestError when `ts` carries different metrics.
  void check_compatible(const TimeSeriesSet& ts) const;
};

struct ScoreRow {
  std::size_t index = 0;
  std::int64_t timestamp = 0;
  std::vector<double> features;  // normalized score per model
  double aggregate = 0.0;
  double classifier = 0.0;  // NaN without a classifier
  bool flag = false;        // aggregate is a generalized-ESD outlier of its trailing window

  bool operator==(const ScoreRow&) const = default;
};

/// Scores every index t with H ≤ t ≤ T − 1 − L.
std::vector<ScoreRow> detect_offline(const DetectionModel& model, const TimeSeriesSet& ts);

/// Incremental scoring that emits a row as soon as its context is complete.
/// Rows match detect_offline on the concatenated stream bit for bit.
class StreamContext {
 public:
  explicit StreamContext(const DetectionModel& model);

  /// Appends consecutive points and returns the rows they complete. Throws
  /// StreamError (leaving the context untouched) when the batch does not
  /// continue the grid or has the wrong metrics.
  std::vector<ScoreRow> append(const TimeSeriesSet& batch);

  std::size_t points_seen() const { return next_index_; }
  std::size_t rows_emitted() const { return emitted_; }

 private:
  void push_point(std::int64_t timestamp, std::span<const double> values, std::vector<ScoreRow>& out);

  const DetectionModel& model_;
  RowContext ctx_;
  ensemble::GeneralizedEsd esd_;
  double weight_sum_;
  std::optional<std::int64_t> step_;
  std::size_t next_index_ = 0;
  std::size_t emitted_ = 0;
  // Ring buffers: raw points and per-index features/aggregates, each holding
  // at most W_max entries ending at the newest index.
  std::deque<std::int64_t> timestamps_;
  std::deque<std::vector<double>> values_;
  std::deque<std::vector<double>> features_;
  std::deque<double> aggregates_;
  std::size_t feature_base_ = 0;  // index of features_.front()
};

/// Header `timestamp,<model_id>...,aggregate,classifier,flag`.
void write_scores_csv(std::ostream& out, const std::vector<std::string>& model_ids,
                      const std::vector<ScoreRow>& rows);
std::string scores_csv_header(const std::vector<std::string>& model_ids);
void write_score_row(std::ostream& out, const ScoreRow& row);

/// `{"rows":…, "flagged":[index…], "flagged_timestamps":[…], "confidence":{index: aggregate}}`.
nlohmann::json detection_result_json(const std::vector<ScoreRow>& rows);

}  // namespace ymir::pipeline
