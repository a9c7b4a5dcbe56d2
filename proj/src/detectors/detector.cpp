#include "ymir/detectors/detector.hpp"

#include <cmath>

#include "ymir/error.hpp"

namespace ymir::detectors {

Json DetectorSpec::to_json() const {
  Json j = {{"kind", kind}, {"params", params}};
  if (weight_hint) j["weight_hint"] = *weight_hint;
  return j;
}

DetectorSpec DetectorSpec::from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw ParameterError("detector spec needs a string 'kind'");
  }
  DetectorSpec spec;
  spec.kind = j.at("kind").get<std::string>();
  if (j.contains("params")) {
    if (!j.at("params").is_object()) throw ParameterError("detector params must be an object");
    spec.params = j.at("params");
  }
  if (j.contains("weight_hint")) {
    const double w = j.at("weight_hint").get<double>();
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("weight_hint must be nonnegative");
    spec.weight_hint = w;
  }
  return spec;
}

std::vector<double> Detector::score_range(const TimeSeriesSet& ts, std::size_t begin,
                                          std::size_t end) const {
  if (ts.metric_count() != meta_.metric_count) {
    throw ShapeError(kind() + " was fitted on " + std::to_string(meta_.metric_count) +
                     " metrics, got " + std::to_string(ts.metric_count()));
  }
  if (begin > end || end > ts.length()) throw SizeError("score range outside the series");
  auto scores = compute(ts, begin, end);
  if (scores.size() != end - begin) {
    throw ContractError(kind() + " returned " + std::to_string(scores.size()) + " scores, expected " +
                        std::to_string(end - begin));
  }
  for (double s : scores) {
    if (!std::isfinite(s) || s < 0.0) {
      throw ContractError(kind() + " produced a score that is negative or not finite");
    }
  }
  return scores;
}

Json Detector::to_json() const {
  return {{"kind", kind()},
          {"train_meta", {{"length", meta_.length}, {"metric_count", meta_.metric_count}}},
          {"state", state_json()}};
}

DetectorRegistry::DetectorRegistry(const DetectorRegistry& other) {
  std::lock_guard lock(other.mutex_);
  entries_ = other.entries_;
}

DetectorRegistry& DetectorRegistry::operator=(const DetectorRegistry& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  entries_ = other.entries_;
  return *this;
}

DetectorRegistry& DetectorRegistry::global() {
  static DetectorRegistry registry = with_builtins();
  return registry;
}

void DetectorRegistry::add(const std::string& kind, FitFn fit, LoadFn load) {
  std::lock_guard lock(mutex_);
  if (!entries_.emplace(kind, Entry{std::move(fit), std::move(load)}).second) {
    throw RegistryError("detector kind '" + kind + "' is already registered");
  }
}

bool DetectorRegistry::contains(const std::string& kind) const {
  std::lock_guard lock(mutex_);
  return entries_.count(kind) > 0;
}

std::vector<std::string> DetectorRegistry::kinds() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [kind, entry] : entries_) out.push_back(kind);
  return out;
}

DetectorPtr DetectorRegistry::fit(const DetectorSpec& spec, const TimeSeriesSet& train,
                                  std::uint64_t seed) const {
  FitFn fit;
  {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(spec.kind);
    if (it == entries_.end()) throw RegistryError("unknown detector kind '" + spec.kind + "'");
    fit = it->second.fit;
  }
  if (!train.all_finite()) throw DataError("training data contains non-finite values");
  return fit(spec.params, train, seed);
}

DetectorPtr DetectorRegistry::load(const Json& serialized) const {
  const auto kind = serialized.at("kind").get<std::string>();
  LoadFn load;
  {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(kind);
    if (it == entries_.end()) throw RegistryError("unknown detector kind '" + kind + "'");
    load = it->second.load;
  }
  const auto& meta = serialized.at("train_meta");
  return load(serialized.at("state"),
              TrainMeta{meta.at("length").get<std::size_t>(), meta.at("metric_count").get<std::size_t>()});
}

DetectorPtr fit_detector(const DetectorSpec& spec, const TimeSeriesSet& train, std::uint64_t seed,
                         const DetectorRegistry& registry) {
  return registry.fit(spec, train, seed);
}

RawScoreSeries score_detector(const Detector& detector, const TimeSeriesSet& ts, std::string model_id) {
  if (model_id.empty()) model_id = detector.kind();
  return {std::move(model_id), detector.score(ts)};
}

void require_training_length(const std::string& kind, const TimeSeriesSet& train, std::size_t minimum) {
  if (train.length() < minimum) {
    throw FitError(kind + " needs at least " + std::to_string(minimum) + " training points, got " +
                   std::to_string(train.length()));
  }
}

namespace params {

void require_known(const std::string& kind, const Json& p, std::initializer_list<const char*> allowed) {
  if (!p.is_object()) throw ParameterError(kind + " params must be an object");
  for (const auto& [key, value] : p.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParameterError(kind + " has no parameter '" + key + "'");
  }
}

double number(const std::string& kind, const Json& p, const char* key, std::optional<double> fallback) {
  if (!p.contains(key)) {
    if (!fallback) throw ParameterError(kind + " requires parameter '" + key + "'");
    return *fallback;
  }
  const auto& v = p.at(key);
  if (!v.is_number() || !std::isfinite(v.get<double>())) {
    throw ParameterError(kind + " parameter '" + key + "' must be a finite number");
  }
  return v.get<double>();
}

std::size_t count(const std::string& kind, const Json& p, const char* key,
                  std::optional<std::size_t> fallback) {
  const double v = number(kind, p, key, fallback ? std::optional<double>(static_cast<double>(*fallback))
                                                 : std::nullopt);
  if (v < 0.0 || std::floor(v) != v) {
    throw ParameterError(kind + " parameter '" + key + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace params
}  // namespace ymir::detectors
