#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ymir/core/timeseries.hpp"

namespace ymir::detectors {

using Json = nlohmann::json;

/// Which model to fit and with what parameters. Serializes to
/// `{"kind": "...", "params": {...}}` (plus `weight_hint` when set).
struct DetectorSpec {
  std::string kind;
  Json params = Json::object();
  std::optional<double> weight_hint;

  Json to_json() const;
  static DetectorSpec from_json(const Json& j);
};

struct RawScoreSeries {
  std::string model_id;
  std::vector<double> scores;
};

/// How many points before and after index t a score at t depends on, once t
/// is far enough from the series start for every detector's steady-state rule
/// to apply. Streaming relies on this to know when a score is final.
struct ScoreContext {
  std::size_t history = 0;
  std::size_t lookahead = 0;
};

struct TrainMeta {
  std::size_t length = 0;
  std::size_t metric_count = 0;
};

/// A fitted, immutable detector ("decision boundary" producer).
class Detector {
 public:
  virtual ~Detector() = default;

  virtual std::string kind() const = 0;
  virtual ScoreContext context() const = 0;
  /// Fitted parameters, enough for the registry to rebuild the detector.
  virtual Json state_json() const = 0;

  const TrainMeta& train_meta() const { return meta_; }

  /// Scores for indices [begin, end) of `ts`, using any other rows of `ts` as
  /// context. The value at t does not depend on which range was requested.
  std::vector<double> score_range(const TimeSeriesSet& ts, std::size_t begin, std::size_t end) const;

  std::vector<double> score(const TimeSeriesSet& ts) const { return score_range(ts, 0, ts.length()); }

  /// Full serialized form: kind, train_meta and state.
  Json to_json() const;

 protected:
  explicit Detector(TrainMeta meta) : meta_(meta) {}
  virtual std::vector<double> compute(const TimeSeriesSet& ts, std::size_t begin,
                                      std::size_t end) const = 0;

 private:
  TrainMeta meta_;
};

using DetectorPtr = std::shared_ptr<const Detector>;

class DetectorRegistry {
 public:
  using FitFn = std::function<DetectorPtr(const Json& params, const TimeSeriesSet& train,
                                          std::uint64_t seed)>;
  using LoadFn = std::function<DetectorPtr(const Json& state, const TrainMeta& meta)>;

  /// Registry preloaded with every built-in kind.
  static DetectorRegistry with_builtins();
  /// Process-wide registry used by default; starts with the built-ins.
  static DetectorRegistry& global();

  void add(const std::string& kind, FitFn fit, LoadFn load);
  bool contains(const std::string& kind) const;
  std::vector<std::string> kinds() const;

  DetectorPtr fit(const DetectorSpec& spec, const TimeSeriesSet& train, std::uint64_t seed) const;
  DetectorPtr load(const Json& serialized) const;

  DetectorRegistry() = default;
  DetectorRegistry(const DetectorRegistry& other);
  DetectorRegistry& operator=(const DetectorRegistry& other);

 private:
  struct Entry {
    FitFn fit;
    LoadFn load;
  };
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

DetectorPtr fit_detector(const DetectorSpec& spec, const TimeSeriesSet& train, std::uint64_t seed,
                         const DetectorRegistry& registry = DetectorRegistry::global());

/// Scores every timestamp of `ts`; model_id defaults to the detector kind.
RawScoreSeries score_detector(const Detector& detector, const TimeSeriesSet& ts,
                              std::string model_id = {});

/// User detectors: fit returns a JSON state, score maps (state, data) to one
/// nonnegative score per timestamp.
using UserFitFn = std::function<Json(const Json& params, const TimeSeriesSet& train)>;
using UserScoreFn = std::function<std::vector<double>(const Json& state, const TimeSeriesSet& ts)>;

/// Registers kind `user_defined:<name>`. Throws RegistryError on duplicates.
/// `context` declares how far the score at t looks back and ahead.
std::string register_user_detector(const std::string& name, UserFitFn fit, UserScoreFn score,
                                   ScoreContext context = {},
                                   DetectorRegistry& registry = DetectorRegistry::global());

// Parameter helpers shared by the built-in kinds.
namespace params {
/// Throws ParameterError if `p` has keys outside `allowed`.
void require_known(const std::string& kind, const Json& p, std::initializer_list<const char*> allowed);
double number(const std::string& kind, const Json& p, const char* key, std::optional<double> fallback);
std::size_t count(const std::string& kind, const Json& p, const char* key,
                  std::optional<std::size_t> fallback);
}  // namespace params

/// Throws FitError if the training segment is shorter than `minimum`.
void require_training_length(const std::string& kind, const TimeSeriesSet& train, std::size_t minimum);

}  // namespace ymir::detectors
