#include "ymir/pipeline/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>

#include "ymir/error.hpp"

namespace ymir::pipeline {
namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ParameterError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ParameterError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::size_t EsdSettings::max_outliers(std::size_t n) const {
  const auto r = static_cast<std::size_t>(std::ceil(max_outlier_fraction * static_cast<double>(n)));
  return std::max<std::size_t>(r, 1);
}

std::vector<detectors::DetectorSpec> PipelineConfig::default_detectors(std::size_t period) {
  using detectors::DetectorSpec;
  return {
      DetectorSpec{"mediff", {{"period", period}}, std::nullopt},
      DetectorSpec{"shesd", {{"period", period}}, std::nullopt},
      DetectorSpec{"moving_average", Json::object(), std::nullopt},
      DetectorSpec{"chebyshev", Json::object(), std::nullopt},
      DetectorSpec{"spectral_residual", Json::object(), std::nullopt},
      DetectorSpec{"vae_recon", Json::object(), std::nullopt},
      DetectorSpec{"isolation_forest", Json::object(), std::nullopt},
      DetectorSpec{"lof", Json::object(), std::nullopt},
  };
}

PipelineConfig PipelineConfig::defaults() {
  PipelineConfig c;
  c.detectors = default_detectors(c.period);
  return c;
}

std::vector<detectors::DetectorSpec> PipelineConfig::resolved_detectors() const {
  auto specs = detectors;
  for (auto& s : specs) {
    if ((s.kind == "mediff" || s.kind == "shesd") && !s.params.contains("period")) {
      s.params["period"] = period;
    }
  }
  return specs;
}

std::vector<double> PipelineConfig::resolved_weights() const {
  if (!weights.empty()) return weights;
  std::vector<double> w;
  for (const auto& s : detectors) w.push_back(s.weight_hint.value_or(1.0));
  return w;
}

std::vector<std::string> PipelineConfig::model_ids() const {
  std::map<std::string, std::size_t> seen;
  std::vector<std::string> ids;
  for (const auto& s : detectors) {
    const std::size_t n = ++seen[s.kind];
    ids.push_back(n == 1 ? s.kind : s.kind + "_" + std::to_string(n));
  }
  return ids;
}

void PipelineConfig::validate(const detectors::DetectorRegistry& registry) const {
  if (detectors.empty()) throw ParameterError("config lists no detectors");
  for (const auto& s : detectors) {
    if (!registry.contains(s.kind)) throw RegistryError("unknown detector kind '" + s.kind + "'");
  }
  if (period < 2) throw ParameterError("period must be at least 2");
  if (!weights.empty() && weights.size() != detectors.size()) {
    throw ParameterError("config has " + std::to_string(weights.size()) + " weights for " +
                         std::to_string(detectors.size()) + " detectors");
  }
  ensemble::EnsembleWeights{resolved_weights()}.validate();
  if (!(esd.alpha > 0.0 && esd.alpha < 1.0)) throw ParameterError("esd alpha must lie in (0, 1)");
  if (!(esd.max_outlier_fraction > 0.0 && esd.max_outlier_fraction < 1.0)) {
    throw ParameterError("esd max_outlier_fraction must lie in (0, 1)");
  }
  if (esd.window < 3) throw ParameterError("esd window must be at least 3");
  if (classifier.window < 2 || classifier.d_model == 0 || classifier.channels == 0) {
    throw ParameterError("classifier window must be at least 2 and dimensions positive");
  }
  train.validate();
}

Json PipelineConfig::to_json() const {
  Json specs = Json::array();
  for (const auto& s : detectors) specs.push_back(s.to_json());
  Json j = {{"seed", seed},
            {"period", period},
            {"detectors", specs},
            {"esd", {{"alpha", esd.alpha}, {"max_outlier_fraction", esd.max_outlier_fraction}, {"window", esd.window}}},
            {"classifier",
             {{"window", classifier.window}, {"d_model", classifier.d_model}, {"channels", classifier.channels}}},
            {"train", train.to_json()}};
  if (!weights.empty()) j["weights"] = weights;
  return j;
}

PipelineConfig PipelineConfig::from_json(const Json& j) {
  reject_unknown(j, {"seed", "period", "detectors", "weights", "esd", "classifier", "train"}, "config");
  PipelineConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    c.period = j.value("period", c.period);
    if (j.contains("detectors")) {
      for (const auto& s : j.at("detectors")) c.detectors.push_back(detectors::DetectorSpec::from_json(s));
    } else {
      c.detectors = default_detectors(c.period);
    }
    c.weights = j.value("weights", c.weights);
    if (j.contains("esd")) {
      const auto& e = j.at("esd");
      reject_unknown(e, {"alpha", "max_outlier_fraction", "window"}, "esd");
      c.esd.alpha = e.value("alpha", c.esd.alpha);
      c.esd.max_outlier_fraction = e.value("max_outlier_fraction", c.esd.max_outlier_fraction);
      c.esd.window = e.value("window", c.esd.window);
    }
    if (j.contains("classifier")) {
      const auto& h = j.at("classifier");
      reject_unknown(h, {"window", "d_model", "channels"}, "classifier");
      c.classifier.window = h.value("window", c.classifier.window);
      c.classifier.d_model = h.value("d_model", c.classifier.d_model);
      c.classifier.channels = h.value("channels", c.classifier.channels);
    }
    if (j.contains("train")) c.train = supervised::TrainConfig::from_json(j.at("train"));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("config " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

std::uint64_t effective_seed(std::uint64_t fallback) {
  const char* env = std::getenv("YMIR_SEED");
  if (env == nullptr || *env == '\0') return fallback;
  std::uint64_t seed = 0;
  const char* end = env + std::char_traits<char>::length(env);
  const auto [ptr, ec] = std::from_chars(env, end, seed);
  if (ec != std::errc() || ptr != end) throw ParameterError("YMIR_SEED must be an unsigned integer");
  return seed;
}

}  // namespace ymir::pipeline
