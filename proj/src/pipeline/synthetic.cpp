#include "ymir/pipeline/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "ymir/core/csv.hpp"
#include "ymir/error.hpp"
#include "ymir/pipeline/artifacts.hpp"
#include "ymir/rng.hpp"

namespace ymir::pipeline {
namespace {

using Json = nlohmann::json;

constexpr std::size_t kPlacementAttempts = 100;
constexpr std::size_t kEventGap = 8;

struct Placement {
  std::size_t min_len;
  std::size_t max_len;
};

class Placer {
 public:
  Placer(std::size_t length, std::size_t margin) : length_(length), margin_(margin) {}

  std::pair<std::size_t, std::size_t> place(Rng& rng, Placement p, const std::string& category) {
    for (std::size_t attempt = 0; attempt < kPlacementAttempts; ++attempt) {
      const std::size_t len = p.min_len + rng.uniform_index(p.max_len - p.min_len + 1);
      if (length_ < 2 * margin_ + len) break;
      const std::size_t start = margin_ + rng.uniform_index(length_ - 2 * margin_ - len + 1);
      const std::size_t end = start + len - 1;
      const bool clash = std::any_of(taken_.begin(), taken_.end(), [&](const auto& r) {
        return start <= r.second + kEventGap && r.first <= end + kEventGap;
      });
      if (clash) continue;
      taken_.emplace_back(start, end);
      return {start, end};
    }
    throw DataError("could not place a " + category + " event without overlap");
  }

 private:
  std::size_t length_;
  std::size_t margin_;
  std::vector<std::pair<std::size_t, std::size_t>> taken_;
};

std::vector<std::size_t> pick_metrics(Rng& rng, std::size_t n, std::size_t count) {
  std::vector<std::size_t> all(n);
  for (std::size_t j = 0; j < n; ++j) all[j] = j;
  rng.shuffle(std::span<std::size_t>(all));
  all.resize(std::min(count, n));
  std::sort(all.begin(), all.end());
  return all;
}

double sign(Rng& rng) { return rng.uniform() < 0.5 ? -1.0 : 1.0; }

}  // namespace

void SyntheticProfile::validate() const {
  if (metrics < 2) throw ParameterError("synthetic profile needs at least 2 metrics");
  if (period < 2) throw ParameterError("synthetic period must be at least 2");
  if (length < 4 * period) throw ParameterError("synthetic length must cover at least 4 periods");
  if (step <= 0) throw ParameterError("synthetic step must be positive");
  if (!(noise_sd > 0.0)) throw ParameterError("noise_sd must be positive");
  if (!(ar_coefficient >= 0.0 && ar_coefficient < 1.0)) throw ParameterError("ar_coefficient must lie in [0, 1)");
}

Json SyntheticProfile::to_json() const {
  return {{"length", length},
          {"metrics", metrics},
          {"period", period},
          {"start", start},
          {"step", step},
          {"noise_sd", noise_sd},
          {"ar_coefficient", ar_coefficient},
          {"seasonal_amplitude", seasonal_amplitude},
          {"spike_magnitude", spike_magnitude},
          {"level_shift_magnitude", level_shift_magnitude},
          {"spatial_magnitude", spatial_magnitude},
          {"counts",
           {{"spike", spikes},
            {"phase", phase_violations},
            {"level_shift", level_shifts},
            {"spatial", spatial},
            {"restart", restarts}}}};
}

SyntheticProfile SyntheticProfile::from_json(const Json& j) {
  static const std::set<std::string> known = {
      "length", "metrics", "period", "start", "step", "noise_sd", "ar_coefficient", "seasonal_amplitude",
      "spike_magnitude", "level_shift_magnitude", "spatial_magnitude", "counts"};
  if (!j.is_object()) throw ParameterError("synthetic profile must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ParameterError("unknown profile key '" + key + "'");
  }
  SyntheticProfile p;
  try {
    p.length = j.value("length", p.length);
    p.metrics = j.value("metrics", p.metrics);
    p.period = j.value("period", p.period);
    p.start = j.value("start", p.start);
    p.step = j.value("step", p.step);
    p.noise_sd = j.value("noise_sd", p.noise_sd);
    p.ar_coefficient = j.value("ar_coefficient", p.ar_coefficient);
    p.seasonal_amplitude = j.value("seasonal_amplitude", p.seasonal_amplitude);
    p.spike_magnitude = j.value("spike_magnitude", p.spike_magnitude);
    p.level_shift_magnitude = j.value("level_shift_magnitude", p.level_shift_magnitude);
    p.spatial_magnitude = j.value("spatial_magnitude", p.spatial_magnitude);
    if (j.contains("counts")) {
      const auto& c = j.at("counts");
      for (const auto& [key, _] : c.items()) {
        if (key != "spike" && key != "phase" && key != "level_shift" && key != "spatial" && key != "restart") {
          throw ParameterError("unknown event category '" + key + "'");
        }
      }
      p.spikes = c.value("spike", p.spikes);
      p.phase_violations = c.value("phase", p.phase_violations);
      p.level_shifts = c.value("level_shift", p.level_shifts);
      p.spatial = c.value("spatial", p.spatial);
      p.restarts = c.value("restart", p.restarts);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("synthetic profile: ") + e.what());
  }
  p.validate();
  return p;
}

SyntheticData generate_synthetic(const SyntheticProfile& profile, std::uint64_t seed) {
  profile.validate();
  const std::size_t T = profile.length, n = profile.metrics, P = profile.period;
  Rng base_rng(derive_seed(seed, 0));
  Rng event_rng(derive_seed(seed, 1));

  // Metric j = level_j + amplitude_j·sin(2πt/P + phase_j) + 0.8·u_j + 0.6·c,
  // with u_j and the shared factor c independent unit-variance AR(1) processes.
  std::vector<double> level(n), amplitude(n), phase(n);
  for (std::size_t j = 0; j < n; ++j) {
    level[j] = 40.0 + 10.0 * static_cast<double>(j);
    amplitude[j] = profile.seasonal_amplitude * (0.75 + 0.5 * base_rng.uniform());
    phase[j] = 2.0 * std::numbers::pi * base_rng.uniform();
  }
  const double phi = profile.ar_coefficient;
  const double innovation = std::sqrt(1.0 - phi * phi);
  Matrix latent(T, n + 1);
  std::vector<double> state(n + 1);
  for (auto& s : state) s = base_rng.normal();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t l = 0; l <= n; ++l) {
      state[l] = phi * state[l] + innovation * base_rng.normal();
      latent(t, l) = state[l];
    }
  }
  auto seasonal = [&](std::size_t j, double t, double shift) {
    return amplitude[j] * std::sin(2.0 * std::numbers::pi * t / static_cast<double>(P) + phase[j] + shift);
  };
  const double sd = profile.noise_sd;
  Matrix values(T, n);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      values(t, j) = level[j] + seasonal(j, static_cast<double>(t), 0.0) +
                     sd * (0.8 * latent(t, j) + 0.6 * latent(t, n));
    }
  }

  SyntheticData out;
  std::vector<int> labels(T, 0);
  Placer placer(T, P / 4);
  auto add_event = [&](const std::string& category, Placement p, std::size_t metric_count, int label) {
    const auto [start, end] = placer.place(event_rng, p, category);
    SyntheticEvent e{category, start, end, pick_metrics(event_rng, n, metric_count), label};
    for (std::size_t t = start; t <= end; ++t) labels[t] = label;
    out.events.push_back(std::move(e));
    return out.events.size() - 1;
  };

  for (std::size_t i = 0; i < profile.spikes; ++i) {
    const auto& e = out.events[add_event("spike", {1, 3}, 1 + event_rng.uniform_index(2), 1)];
    for (std::size_t m : e.metrics) {
      const double s = sign(event_rng);
      for (std::size_t t = e.start; t <= e.end; ++t) {
        values(t, m) += s * sd * profile.spike_magnitude * (0.8 + 0.4 * event_rng.uniform());
      }
    }
  }
  for (std::size_t i = 0; i < profile.phase_violations; ++i) {
    const auto& e = out.events[add_event("phase", {P / 12, P / 6}, 1 + event_rng.uniform_index(2), 1)];
    for (std::size_t m : e.metrics) {
      for (std::size_t t = e.start; t <= e.end; ++t) {
        const double tt = static_cast<double>(t);
        values(t, m) += seasonal(m, tt, std::numbers::pi) - seasonal(m, tt, 0.0);
      }
    }
  }
  for (std::size_t i = 0; i < profile.level_shifts; ++i) {
    const auto& e = out.events[add_event("level_shift", {20, 50}, 1 + event_rng.uniform_index(3), 1)];
    for (std::size_t m : e.metrics) {
      const double delta = sign(event_rng) * sd * profile.level_shift_magnitude * (0.8 + 0.4 * event_rng.uniform());
      for (std::size_t t = e.start; t <= e.end; ++t) values(t, m) += delta;
    }
  }
  for (std::size_t i = 0; i < profile.spatial; ++i) {
    const auto& e = out.events[add_event("spatial", {10, 30}, 1, 1)];
    const std::size_t m = e.metrics.front();
    const double delta = sign(event_rng) * sd * profile.spatial_magnitude * (0.8 + 0.4 * event_rng.uniform());
    for (std::size_t t = e.start; t <= e.end; ++t) {
      // The metric stops following the shared factor and drifts away from its peers.
      values(t, m) += delta - 2.0 * sd * 0.6 * latent(t, n);
    }
  }
  for (std::size_t i = 0; i < profile.restarts; ++i) {
    const auto& e = out.events[add_event("restart", {3, 10}, n, 0)];
    for (std::size_t t = e.start; t <= e.end; ++t) {
      for (std::size_t j = 0; j < n; ++j) values(t, j) = 0.05 * sd * std::abs(event_rng.normal());
    }
  }
  std::sort(out.events.begin(), out.events.end(),
            [](const SyntheticEvent& a, const SyntheticEvent& b) { return a.start < b.start; });

  std::vector<std::int64_t> stamps(T);
  for (std::size_t t = 0; t < T; ++t) stamps[t] = profile.start + static_cast<std::int64_t>(t) * profile.step;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < n; ++j) names.push_back("m" + std::to_string(j));
  out.data = TimeSeriesSet::make(stamps, std::move(values), std::move(names));
  out.labels = LabelSeries::full(std::move(stamps), std::move(labels));
  return out;
}

Json SyntheticData::events_json(const SyntheticProfile& profile, std::uint64_t seed) const {
  Json list = Json::array();
  Json counts = {{"spike", 0}, {"phase", 0}, {"level_shift", 0}, {"spatial", 0}, {"restart", 0}};
  for (const auto& e : events) {
    list.push_back({{"category", e.category},
                      {"start", e.start},
                      {"end", e.end},
                      {"start_timestamp", data.timestamps()[e.start]},
                      {"end_timestamp", data.timestamps()[e.end]},
                      {"metrics", e.metrics},
                      {"label", e.label}});
    counts[e.category] = counts[e.category].get<std::size_t>() + 1;
  }
  return {{"seed", seed}, {"profile", profile.to_json()}, {"counts", counts}, {"events", list}};
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data,
                     const SyntheticProfile& profile, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  write_timeseries_csv(dir / "data.csv", data.data);
  write_labels_csv(dir / "labels.csv", data.labels);
  write_json_file(dir / "events.json", data.events_json(profile, seed));
}

}  // namespace ymir::pipeline
