#include <algorithm>
#include <cmath>

#include "ymir/detectors/detector.hpp"
#include "ymir/detectors/isolation_forest.hpp"
#include "ymir/detectors/univariate.hpp"
#include "ymir/detectors/vae.hpp"
#include "ymir/error.hpp"
#include "ymir/stats.hpp"

namespace ymir::detectors {
namespace {

TrainMeta meta_of(const TimeSeriesSet& train) { return {train.length(), train.metric_count()}; }

// Pointwise maximum over metrics of a per-metric rule.
template <typename Rule>
std::vector<double> max_over_metrics(const TimeSeriesSet& ts, std::size_t begin, std::size_t end,
                                     Rule rule) {
  std::vector<double> out(end - begin, 0.0);
  for (std::size_t j = 0; j < ts.metric_count(); ++j) {
    const auto x = ts.metric(j);
    for (std::size_t t = begin; t < end; ++t) out[t - begin] = std::max(out[t - begin], rule(x, j, t));
  }
  return out;
}

class MovingAverageDetector final : public Detector {
 public:
  MovingAverageDetector(TrainMeta meta, std::size_t window) : Detector(meta), window_(window) {}

  static DetectorPtr fit(const Json& p, const TimeSeriesSet& train, std::uint64_t) {
    params::require_known("moving_average", p, {"window"});
    const auto window = params::count("moving_average", p, "window", 20);
    if (window < 2) throw ParameterError("moving_average window must be at least 2");
    require_training_length("moving_average", train, 1);
    return std::make_shared<MovingAverageDetector>(meta_of(train), window);
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    return std::make_shared<MovingAverageDetector>(meta, s.at("window").get<std::size_t>());
  }

  std::string kind() const override { return "moving_average"; }
  ScoreContext context() const override { return {window_, 0}; }
  Json state_json() const override { return {{"window", window_}}; }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    return max_over_metrics(ts, b, e, [&](const std::vector<double>& x, std::size_t, std::size_t t) {
      return moving_average_score_at(x, t, window_);
    });
  }

 private:
  std::size_t window_;
};

class ChebyshevDetector final : public Detector {
 public:
  ChebyshevDetector(TrainMeta meta, std::vector<double> mean, std::vector<double> sd)
      : Detector(meta), mean_(std::move(mean)), sd_(std::move(sd)) {}

  static DetectorPtr fit(const Json& p, const TimeSeriesSet& train, std::uint64_t) {
    params::require_known("chebyshev", p, {});
    require_training_length("chebyshev", train, 2);
    std::vector<double> mean, sd;
    for (std::size_t j = 0; j < train.metric_count(); ++j) {
      const auto col = train.metric(j);
      mean.push_back(stats::mean(col));
      sd.push_back(stats::population_sd(col));
    }
    return std::make_shared<ChebyshevDetector>(meta_of(train), std::move(mean), std::move(sd));
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    auto mean = s.at("mean").get<std::vector<double>>();
    auto sd = s.at("sd").get<std::vector<double>>();
    if (mean.size() != meta.metric_count || sd.size() != meta.metric_count) {
      throw ShapeError("chebyshev state does not match metric count");
    }
    return std::make_shared<ChebyshevDetector>(meta, std::move(mean), std::move(sd));
  }

  std::string kind() const override { return "chebyshev"; }
  ScoreContext context() const override { return {0, 0}; }
  Json state_json() const override { return {{"mean", mean_}, {"sd", sd_}}; }

  const std::vector<double>& means() const { return mean_; }
  const std::vector<double>& deviations() const { return sd_; }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    std::vector<double> out(e - b, 0.0);
    for (std::size_t t = b; t < e; ++t) {
      for (std::size_t j = 0; j < ts.metric_count(); ++j) {
        out[t - b] = std::max(out[t - b], chebyshev_score(ts.at(t, j), mean_[j], sd_[j]));
      }
    }
    return out;
  }

 private:
  std::vector<double> mean_;
  std::vector<double> sd_;
};

class SpectralResidualDetector final : public Detector {
 public:
  SpectralResidualDetector(TrainMeta meta, std::size_t window, std::size_t filter)
      : Detector(meta), window_(window), filter_(filter) {}

  static DetectorPtr fit(const Json& p, const TimeSeriesSet& train, std::uint64_t) {
    params::require_known("spectral_residual", p, {"window", "filter"});
    const auto window = params::count("spectral_residual", p, "window", 64);
    const auto filter = params::count("spectral_residual", p, "filter", 3);
    if (window < 2 || (window & (window - 1)) != 0) {
      throw ParameterError("spectral_residual window must be a power of two");
    }
    if (filter % 2 == 0 || filter > window) throw ParameterError("spectral_residual filter must be odd");
    require_training_length("spectral_residual", train, window);
    return std::make_shared<SpectralResidualDetector>(meta_of(train), window, filter);
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    return std::make_shared<SpectralResidualDetector>(meta, s.at("window").get<std::size_t>(),
                                                      s.at("filter").get<std::size_t>());
  }

  std::string kind() const override { return "spectral_residual"; }
  ScoreContext context() const override { return {window_ - 1, 0}; }
  Json state_json() const override { return {{"window", window_}, {"filter", filter_}}; }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    return max_over_metrics(ts, b, e, [&](const std::vector<double>& x, std::size_t, std::size_t t) {
      return spectral_residual_score_at(x, t, window_, filter_);
    });
  }

 private:
  std::size_t window_;
  std::size_t filter_;
};

class MediffDetector final : public Detector {
 public:
  MediffDetector(TrainMeta meta, MediffParams p, std::vector<double> scale)
      : Detector(meta), p_(p), scale_(std::move(scale)) {}

  static DetectorPtr fit(const Json& j, const TimeSeriesSet& train, std::uint64_t) {
    params::require_known("mediff", j, {"period", "lags"});
    MediffParams p{params::count("mediff", j, "period", std::nullopt), params::count("mediff", j, "lags", 3)};
    if (p.period < 2) throw ParameterError("mediff period must be at least 2");
    if (p.lags < 1) throw ParameterError("mediff lags must be at least 1");
    require_training_length("mediff", train, p.lags * p.period);
    std::vector<double> scale;
    for (std::size_t m = 0; m < train.metric_count(); ++m) scale.push_back(mediff_scale(train.metric(m), p));
    return std::make_shared<MediffDetector>(meta_of(train), p, std::move(scale));
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    auto scale = s.at("scale").get<std::vector<double>>();
    if (scale.size() != meta.metric_count) throw ShapeError("mediff state does not match metric count");
    return std::make_shared<MediffDetector>(
        meta, MediffParams{s.at("period").get<std::size_t>(), s.at("lags").get<std::size_t>()},
        std::move(scale));
  }

  std::string kind() const override { return "mediff"; }
  ScoreContext context() const override { return {p_.lags * p_.period, 0}; }
  Json state_json() const override {
    return {{"period", p_.period}, {"lags", p_.lags}, {"scale", scale_}};
  }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    return max_over_metrics(ts, b, e, [&](const std::vector<double>& x, std::size_t j, std::size_t t) {
      return mediff_deviation(x, t, p_) / (scale_[j] + kScoreEpsilon);
    });
  }

 private:
  MediffParams p_;
  std::vector<double> scale_;
};

// Phase comes from the timestamp relative to the training start, so scores do
// not depend on where a scored segment begins.
class ShesdDetector final : public Detector {
 public:
  ShesdDetector(TrainMeta meta, std::vector<SeasonalProfile> profiles, std::int64_t origin,
                std::int64_t step)
      : Detector(meta), profiles_(std::move(profiles)), origin_(origin), step_(step) {}

  static DetectorPtr fit(const Json& j, const TimeSeriesSet& train, std::uint64_t) {
    params::require_known("shesd", j, {"period"});
    const auto period = params::count("shesd", j, "period", std::nullopt);
    if (period < 2) throw ParameterError("shesd period must be at least 2");
    require_training_length("shesd", train, 2 * period);
    std::vector<SeasonalProfile> profiles;
    for (std::size_t m = 0; m < train.metric_count(); ++m) {
      profiles.push_back(fit_seasonal_profile(train.metric(m), period));
    }
    return std::make_shared<ShesdDetector>(meta_of(train), std::move(profiles), train.timestamps().front(),
                                           train.step());
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    std::vector<SeasonalProfile> profiles;
    for (const auto& p : s.at("profiles")) {
      SeasonalProfile profile;
      profile.phase_median = p.at("phase_median").get<std::vector<double>>();
      profile.period = profile.phase_median.size();
      profile.level = p.at("level").get<double>();
      profile.scale = p.at("scale").get<double>();
      profiles.push_back(std::move(profile));
    }
    if (profiles.size() != meta.metric_count) throw ShapeError("shesd state does not match metric count");
    return std::make_shared<ShesdDetector>(meta, std::move(profiles), s.at("origin").get<std::int64_t>(),
                                           s.at("step").get<std::int64_t>());
  }

  std::string kind() const override { return "shesd"; }
  ScoreContext context() const override { return {0, 0}; }
  Json state_json() const override {
    Json profiles = Json::array();
    for (const auto& p : profiles_) {
      profiles.push_back({{"phase_median", p.phase_median}, {"level", p.level}, {"scale", p.scale}});
    }
    return {{"origin", origin_}, {"step", step_}, {"profiles", std::move(profiles)}};
  }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    const auto period = static_cast<std::int64_t>(profiles_.front().period);
    std::vector<double> out(e - b, 0.0);
    for (std::size_t t = b; t < e; ++t) {
      const std::int64_t offset = ts.timestamps()[t] - origin_;
      std::int64_t index = offset / step_;
      if (offset % step_ != 0 && offset < 0) --index;
      const auto phase = static_cast<std::size_t>(((index % period) + period) % period);
      for (std::size_t j = 0; j < ts.metric_count(); ++j) {
        out[t - b] = std::max(out[t - b], profiles_[j].score(ts.at(t, j), phase));
      }
    }
    return out;
  }

 private:
  std::vector<SeasonalProfile> profiles_;
  std::int64_t origin_;
  std::int64_t step_;
};

class IsolationForestDetector final : public Detector {
 public:
  IsolationForestDetector(TrainMeta meta, IsolationForest forest) : Detector(meta), forest_(std::move(forest)) {}

  static DetectorPtr fit(const Json& p, const TimeSeriesSet& train, std::uint64_t seed) {
    params::require_known("isolation_forest", p, {"trees", "subsample"});
    IsolationForestParams ip{params::count("isolation_forest", p, "trees", 100),
                             params::count("isolation_forest", p, "subsample", 256)};
    if (ip.subsample < 2) throw ParameterError("isolation_forest subsample must be at least 2");
    require_training_length("isolation_forest", train, 2);
    return std::make_shared<IsolationForestDetector>(meta_of(train),
                                                     IsolationForest::fit(train.values(), ip, seed));
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    return std::make_shared<IsolationForestDetector>(meta, IsolationForest::from_json(s));
  }

  std::string kind() const override { return "isolation_forest"; }
  ScoreContext context() const override { return {0, 0}; }
  Json state_json() const override { return forest_.to_json(); }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    std::vector<double> out;
    out.reserve(e - b);
    for (std::size_t t = b; t < e; ++t) out.push_back(forest_.score(ts.values().row(t)));
    return out;
  }

 private:
  IsolationForest forest_;
};

class LofDetector final : public Detector {
 public:
  LofDetector(TrainMeta meta, LocalOutlierFactor lof) : Detector(meta), lof_(std::move(lof)) {}

  static DetectorPtr fit(const Json& p, const TimeSeriesSet& train, std::uint64_t) {
    params::require_known("lof", p, {"neighbors"});
    const auto k = params::count("lof", p, "neighbors", 20);
    if (k == 0) throw ParameterError("lof needs at least one neighbor");
    require_training_length("lof", train, k + 1);
    return std::make_shared<LofDetector>(meta_of(train), LocalOutlierFactor::fit(train.values(), k));
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    return std::make_shared<LofDetector>(meta, LocalOutlierFactor::from_json(s));
  }

  std::string kind() const override { return "lof"; }
  ScoreContext context() const override { return {0, 0}; }
  Json state_json() const override { return lof_.to_json(); }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    std::vector<double> out;
    out.reserve(e - b);
    for (std::size_t t = b; t < e; ++t) out.push_back(lof_.score(ts.values().row(t)));
    return out;
  }

 private:
  LocalOutlierFactor lof_;
};

class VaeDetector final : public Detector {
 public:
  VaeDetector(TrainMeta meta, VaeModel model) : Detector(meta), model_(std::move(model)) {}

  static DetectorPtr fit(const Json& p, const TimeSeriesSet& train, std::uint64_t seed) {
    const std::string kind = "vae_recon";
    params::require_known(kind, p, {"window", "hidden", "latent", "epochs", "batch", "learning_rate"});
    VaeParams vp;
    vp.window = params::count(kind, p, "window", vp.window);
    vp.hidden = params::count(kind, p, "hidden", vp.hidden);
    vp.latent = params::count(kind, p, "latent", vp.latent);
    vp.epochs = params::count(kind, p, "epochs", vp.epochs);
    vp.batch = params::count(kind, p, "batch", vp.batch);
    vp.learning_rate = params::number(kind, p, "learning_rate", vp.learning_rate);
    if (vp.window == 0 || vp.hidden == 0 || vp.latent == 0 || vp.batch == 0 || !(vp.learning_rate > 0.0)) {
      throw ParameterError("vae_recon sizes and learning_rate must be positive");
    }
    require_training_length(kind, train, vp.window);
    return std::make_shared<VaeDetector>(meta_of(train), VaeModel::fit(train, vp, seed));
  }
  static DetectorPtr load(const Json& s, const TrainMeta& meta) {
    return std::make_shared<VaeDetector>(meta, VaeModel::from_json(s, meta.metric_count));
  }

  std::string kind() const override { return "vae_recon"; }
  ScoreContext context() const override {
    return {model_.hyper().window - 1, model_.hyper().window - 1};
  }
  Json state_json() const override { return model_.to_json(); }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    return model_.score_range(ts, b, e);
  }

 private:
  VaeModel model_;
};

class UserDetector final : public Detector {
 public:
  UserDetector(TrainMeta meta, std::string kind, Json state, UserScoreFn score, ScoreContext context)
      : Detector(meta),
        kind_(std::move(kind)),
        state_(std::move(state)),
        score_(std::move(score)),
        context_(context) {}

  std::string kind() const override { return kind_; }
  ScoreContext context() const override { return context_; }
  Json state_json() const override { return state_; }

 protected:
  std::vector<double> compute(const TimeSeriesSet& ts, std::size_t b, std::size_t e) const override {
    auto all = score_(state_, ts);
    if (all.size() != ts.length()) {
      throw ContractError(kind_ + " returned " + std::to_string(all.size()) + " scores for " +
                          std::to_string(ts.length()) + " timestamps");
    }
    return {all.begin() + static_cast<std::ptrdiff_t>(b), all.begin() + static_cast<std::ptrdiff_t>(e)};
  }

 private:
  std::string kind_;
  Json state_;
  UserScoreFn score_;
  ScoreContext context_;
};

template <typename D>
void add_builtin(DetectorRegistry& r, const std::string& kind) {
  r.add(kind, &D::fit, &D::load);
}

}  // namespace

DetectorRegistry DetectorRegistry::with_builtins() {
  DetectorRegistry r;
  add_builtin<MediffDetector>(r, "mediff");
  add_builtin<ShesdDetector>(r, "shesd");
  add_builtin<MovingAverageDetector>(r, "moving_average");
  add_builtin<ChebyshevDetector>(r, "chebyshev");
  add_builtin<SpectralResidualDetector>(r, "spectral_residual");
  add_builtin<VaeDetector>(r, "vae_recon");
  add_builtin<IsolationForestDetector>(r, "isolation_forest");
  add_builtin<LofDetector>(r, "lof");
  return r;
}

std::string register_user_detector(const std::string& name, UserFitFn fit, UserScoreFn score,
                                   ScoreContext context, DetectorRegistry& registry) {
  if (name.empty()) throw RegistryError("user detector name must be nonempty");
  if (!fit || !score) throw RegistryError("user detector '" + name + "' needs fit and score functions");
  const std::string kind = "user_defined:" + name;
  registry.add(
      kind,
      [kind, fit, score, context](const Json& p, const TimeSeriesSet& train, std::uint64_t) -> DetectorPtr {
        return std::make_shared<UserDetector>(meta_of(train), kind, fit(p, train), score, context);
      },
      [kind, score, context](const Json& state, const TrainMeta& meta) -> DetectorPtr {
        return std::make_shared<UserDetector>(meta, kind, state, score, context);
      });
  return kind;
}

}  // namespace ymir::detectors
