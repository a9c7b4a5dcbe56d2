#include "ymir/pipeline/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ymir/core/csv.hpp"
#include "ymir/error.hpp"
#include "ymir/pipeline/synthetic.hpp"

namespace ymir::pipeline {

namespace fs = std::filesystem;

RunManifest run_train(const TrainCommand& cmd) {
  PipelineConfig config = cmd.config ? PipelineConfig::load(*cmd.config) : PipelineConfig::defaults();
  config.seed = effective_seed(config.seed);
  const TimeSeriesSet data = impute_missing(load_timeseries_csv(cmd.data));
  std::optional<LabelSeries> labels;
  if (cmd.labels) labels = load_labels_csv(*cmd.labels, data);
  const auto outputs = train_pipeline(data, labels ? &*labels : nullptr, config, cmd.unsupervised_only);
  save_artifacts(cmd.out, outputs);
  return outputs.manifest;
}

std::size_t run_detect(const DetectCommand& cmd) {
  if (cmd.batch == 0) throw ParameterError("batch size must be positive");
  const auto loaded = load_artifacts(cmd.model);
  const auto& model = loaded.model;
  TimeSeriesSet data = load_timeseries_csv(cmd.data);
  model.check_compatible(data);

  std::vector<ScoreRow> rows;
  if (cmd.mode == DetectMode::kOffline) {
    if (!data.all_finite()) data = impute_missing(data);
    rows = detect_offline(model, data);
  } else {
    StreamContext stream(model);
    for (std::size_t begin = 0; begin < data.length(); begin += cmd.batch) {
      auto emitted = stream.append(data.slice(begin, std::min(data.length(), begin + cmd.batch)));
      std::move(emitted.begin(), emitted.end(), std::back_inserter(rows));
    }
  }

  fs::create_directories(cmd.out);
  std::ofstream csv(cmd.out / "scores.csv");
  if (!csv) throw DataError("cannot write " + (cmd.out / "scores.csv").string());
  write_scores_csv(csv, model.model_ids, rows);
  csv.close();
  if (!csv) throw DataError("failed writing scores");
  write_json_file(cmd.out / "result.json", detection_result_json(rows));
  return rows.size();
}

eval::EvalReport run_eval(const EvalCommand& cmd) {
  const TimeSeriesSet scores = load_timeseries_csv(cmd.scores);
  const auto& names = scores.metric_names();
  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
  };
  const auto classifier = column_of("classifier");
  const auto aggregate = column_of("aggregate");
  if (!aggregate) throw ParseError(cmd.scores.string() + ": no aggregate column");

  std::size_t column = *aggregate;
  if (classifier) {
    const auto values = scores.metric(*classifier);
    const bool any_finite = std::any_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    if (any_finite) column = *classifier;
  }
  const LabelSeries truth = load_labels_csv(cmd.labels, scores, UnknownTimestamps::kSkip);
  if (!truth.fully_labeled()) {
    throw ContractError("labels cover " + std::to_string(truth.labeled_count()) + " of " +
                        std::to_string(truth.length()) + " scored points; evaluation needs all of them");
  }
  const auto report = eval::best_range_f1(scores.metric(column), truth, cmd.thresholds);
  write_json_file(cmd.out, report.to_json());
  return report;
}

void run_synth(const SynthCommand& cmd) {
  const SyntheticProfile profile =
      cmd.profile ? SyntheticProfile::from_json(read_json_file(*cmd.profile)) : SyntheticProfile{};
  write_synthetic(cmd.out, generate_synthetic(profile, cmd.seed), profile, cmd.seed);
}

}  // namespace ymir::pipeline
