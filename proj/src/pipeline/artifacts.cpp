#include "ymir/pipeline/artifacts.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "ymir/error.hpp"
#include "ymir/rng.hpp"
#include "ymir/supervised/dataset.hpp"

namespace ymir::pipeline {
namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001B3ULL;
    }
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xCBF29CE484222325ULL;
};

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

Fingerprint Fingerprint::of(const TimeSeriesSet& ts) {
  Fnv1a h;
  for (const auto& name : ts.metric_names()) {
    h.bytes(name.data(), name.size());
    h.u64(name.size());
  }
  for (std::int64_t t : ts.timestamps()) h.u64(static_cast<std::uint64_t>(t));
  for (double v : ts.values().data) h.u64(std::bit_cast<std::uint64_t>(v));
  return {ts.length(), ts.metric_count(), hex64(h.value())};
}

Json RunManifest::to_json() const {
  return {{"version", version},
          {"mode", mode},
          {"rho", rho},
          {"config", config.to_json()},
          {"metric_names", metric_names},
          {"model_ids", model_ids},
          {"step", step},
          {"files", files},
          {"fingerprint",
           {{"length", fingerprint.length},
            {"metric_count", fingerprint.metric_count},
            {"checksum", fingerprint.checksum}}}};
}

RunManifest RunManifest::from_json(const Json& j) {
  RunManifest m;
  try {
    m.version = j.at("version").get<std::string>();
    m.mode = j.at("mode").get<std::string>();
    m.rho = j.at("rho").get<double>();
    m.config = PipelineConfig::from_json(j.at("config"));
    m.metric_names = j.at("metric_names").get<std::vector<std::string>>();
    m.model_ids = j.at("model_ids").get<std::vector<std::string>>();
    m.step = j.at("step").get<std::int64_t>();
    m.files = j.at("files").get<std::vector<std::string>>();
    const auto& f = j.at("fingerprint");
    m.fingerprint = {f.at("length").get<std::size_t>(), f.at("metric_count").get<std::size_t>(),
                     f.at("checksum").get<std::string>()};
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(std::string("malformed manifest: ") + e.what());
  }
  if (m.model_ids != m.config.model_ids()) throw ManifestError("manifest model ids do not match its config");
  return m;
}

TrainOutputs train_pipeline(const TimeSeriesSet& input, const LabelSeries* labels,
                            const PipelineConfig& config, bool unsupervised_only,
                            const detectors::DetectorRegistry& registry) {
  config.validate(registry);
  const TimeSeriesSet data = input.all_finite() ? input : impute_missing(input);
  const std::size_t T = data.length();
  if (labels != nullptr && labels->length() != T) {
    throw AlignmentError("labels cover " + std::to_string(labels->length()) + " points, data " +
                         std::to_string(T));
  }

  TrainOutputs out;
  DetectionModel& model = out.model;
  model.metric_names = data.metric_names();
  model.step = data.step();
  model.model_ids = config.model_ids();

  const auto specs = config.resolved_detectors();
  std::vector<ensemble::RawScoreSeries> raw;
  for (std::size_t j = 0; j < specs.size(); ++j) {
    auto det = registry.fit(specs[j], data, derive_seed(config.seed, 100 + j));
    raw.push_back(detectors::score_detector(*det, data, model.model_ids[j]));
    model.detectors.push_back(std::move(det));
  }
  model.normalizer = ensemble::fit_normalizer(raw);
  model.weights = {config.resolved_weights()};
  model.esd_window = config.esd.window;
  model.esd_alpha = config.esd.alpha;
  model.esd_max_outliers = config.esd.max_outliers(config.esd.window);

  out.train_features = ensemble::build_feature_matrix(raw, model.normalizer);
  out.train_result = ensemble::detect_unsupervised(out.train_features, model.weights, config.esd.alpha,
                                                   config.esd.max_outliers(T));

  RunManifest& m = out.manifest;
  m.mode = "unsupervised";
  if (labels != nullptr && !unsupervised_only) {
    const auto pseudo = supervised::make_pseudo_labels(out.train_result, config.train.threshold, T);
    auto fused = supervised::fuse_labels(pseudo, *labels);
    fused.targets = supervised::smooth_targets(fused, config.train.epsilon_max);
    const auto standardizer = supervised::Standardizer::fit(data);
    const auto dataset = supervised::build_dataset(data, out.train_features, fused.targets,
                                                   config.classifier.window, standardizer);
    supervised::TrainConfig tc = config.train;
    tc.seed = derive_seed(config.seed, 1);
    auto clf = supervised::train_classifier(dataset, tc, config.classifier, standardizer);
    clf.metric_names = model.metric_names;
    clf.model_ids = model.model_ids;
    model.classifier = std::move(clf);
    m.mode = fused.rho >= 1.0 ? "supervised" : "semi_supervised";
    m.rho = fused.rho;
    out.labels = std::move(fused);
  }

  m.config = config;
  m.metric_names = model.metric_names;
  m.model_ids = model.model_ids;
  m.step = model.step;
  for (const auto& id : model.model_ids) m.files.push_back("detectors/" + id + ".json");
  m.files.push_back("normalizer.json");
  m.files.push_back("train_result.json");
  if (model.classifier) m.files.push_back("classifier.json");
  m.fingerprint = Fingerprint::of(data);
  return out;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ManifestError(path.string() + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw DataError("failed writing " + path.string());
}

void save_artifacts(const fs::path& dir, const TrainOutputs& outputs) {
  const auto& model = outputs.model;
  for (std::size_t j = 0; j < model.detectors.size(); ++j) {
    write_json_file(dir / "detectors" / (model.model_ids[j] + ".json"), model.detectors[j]->to_json());
  }
  write_json_file(dir / "normalizer.json", model.normalizer.to_json());
  write_json_file(dir / "train_result.json", outputs.train_result.to_json());
  if (model.classifier) write_json_file(dir / "classifier.json", model.classifier->to_json());
  write_json_file(dir / "manifest.json", outputs.manifest.to_json());
}

LoadedModel load_artifacts(const fs::path& dir, const detectors::DetectorRegistry& registry) {
  LoadedModel out;
  out.manifest = RunManifest::from_json(read_json_file(dir / "manifest.json"));
  const auto& m = out.manifest;
  if (m.metric_names.size() != m.fingerprint.metric_count) {
    throw ManifestError("manifest metric list disagrees with its fingerprint");
  }
  DetectionModel& model = out.model;
  model.metric_names = m.metric_names;
  model.step = m.step;
  model.model_ids = m.model_ids;
  for (const auto& id : m.model_ids) {
    auto det = registry.load(read_json_file(dir / "detectors" / (id + ".json")));
    if (det->train_meta().metric_count != m.metric_names.size()) {
      throw ManifestError("detector " + id + " was fitted on a different metric count");
    }
    model.detectors.push_back(std::move(det));
  }
  model.normalizer = ensemble::Normalizer::from_json(read_json_file(dir / "normalizer.json"));
  model.weights = {m.config.resolved_weights()};
  model.esd_window = m.config.esd.window;
  model.esd_alpha = m.config.esd.alpha;
  model.esd_max_outliers = m.config.esd.max_outliers(m.config.esd.window);
  const bool has_classifier = std::find(m.files.begin(), m.files.end(), "classifier.json") != m.files.end();
  if (has_classifier) {
    model.classifier = supervised::ClassifierModel::from_json(read_json_file(dir / "classifier.json"));
    if (model.classifier->metric_names != model.metric_names || model.classifier->model_ids != model.model_ids) {
      throw ManifestError("classifier was trained on different metrics or models");
    }
  }
  if (model.normalizer.model_ids() != model.model_ids) {
    throw ManifestError("normalizer covers different models than the manifest");
  }
  return out;
}

}  // namespace ymir::pipeline
