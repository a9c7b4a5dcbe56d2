// Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "grad_checks.hpp"
#include "oracles.hpp"
#include "ymir/core/csv.hpp"
#include "ymir/ensemble/ensemble.hpp"
#include "ymir/ensemble/esd.hpp"
#include "ymir/eval/range_metrics.hpp"
#include "ymir/pipeline/artifacts.hpp"
#include "ymir/pipeline/commands.hpp"
#include "ymir/pipeline/synthetic.hpp"
#include "ymir/rng.hpp"

using namespace ymir;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------- criterion 1

Outcome esd_oracle() {
  std::vector<double> hand(9, 0.0);
  hand.push_back(10.0);
  const bool hand_ok = ensemble::generalized_esd(hand, 0.05, 3) == std::vector<std::size_t>{9} &&
                       oracle::rosner_esd(hand, 0.05, 3) == std::vector<std::size_t>{9};
  Rng rng(2024);
  std::size_t agree = 0, flagged = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform_index(48));
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    const std::size_t spikes = static_cast<std::size_t>(rng.uniform_index(4));
    for (std::size_t s = 0; s < spikes; ++s) x[rng.uniform_index(n)] += rng.uniform(2.0, 10.0);
    const std::size_t r = 1 + static_cast<std::size_t>(rng.uniform_index(std::max<std::size_t>(n / 2, 1)));
    const auto got = ensemble::generalized_esd(x, 0.05, r);
    const auto expected = oracle::rosner_esd(x, 0.05, r);
    agree += got == expected ? 1 : 0;
    flagged += expected.empty() ? 0 : 1;
  }
  return {hand_ok && agree == 200, "hand case " + std::string(hand_ok ? "ok" : "WRONG") + ", " +
                                       std::to_string(agree) + "/200 series agree (" + std::to_string(flagged) +
                                       " with outliers)"};
}

// ---------------------------------------------------------------- criterion 2

Outcome gradient_checks() {
  double cls = 0.0, base = 0.0, vae = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cls = std::max(cls, gradcheck::classifier_random_draw(1000 + seed));
    base = std::max(base, gradcheck::baseline_draw(2000 + seed));
    vae = std::max(vae, gradcheck::vae_draw(3000 + seed));
  }
  // Default architecture, random subset of coordinates.
  supervised::ClassifierHyper full;
  full.metric_count = 6;
  full.model_count = 8;
  for (std::uint64_t seed = 1; seed <= 2; ++seed) cls = std::max(cls, gradcheck::classifier_draw(full, seed, 400));
  const bool ok = cls < 1e-4 && base < 1e-4 && vae < 1e-4;
  return {ok, "max relative error classifier " + fmt("%.2e", cls) + " (22 draws), baseline " + fmt("%.2e", base) +
                  " (20), vae " + fmt("%.2e", vae) + " (20)"};
}

// ---------------------------------------------------------------- criterion 3

Outcome normalization_invariants() {
  Rng rng(77);
  std::size_t range_fail = 0, mono_fail = 0, pow2_fail = 0, flag_fail = 0;
  double arbitrary_dev = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t k = 1 + static_cast<std::size_t>(rng.uniform_index(6));
    const std::size_t T = 3 + static_cast<std::size_t>(rng.uniform_index(60));
    std::vector<ensemble::RawScoreSeries> train(k);
    for (std::size_t j = 0; j < k; ++j) {
      train[j].model_id = "m" + std::to_string(j);
      const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform_index(80));
      const int shape = static_cast<int>(rng.uniform_index(4));
      for (std::size_t t = 0; t < len; ++t) {
        double v = shape == 0 ? 2.5 : std::abs(rng.normal()) * std::pow(10.0, rng.uniform(-3, 3));
        if (shape == 3) v = std::round(v);
        train[j].scores.push_back(v);
      }
    }
    const auto norm = ensemble::fit_normalizer(train);
    std::vector<ensemble::RawScoreSeries> test(k);
    for (std::size_t j = 0; j < k; ++j) {
      test[j].model_id = train[j].model_id;
      for (std::size_t t = 0; t < T; ++t) test[j].scores.push_back(std::abs(rng.normal()) * rng.uniform(0, 1e3));
      auto sorted = test[j].scores;
      std::sort(sorted.begin(), sorted.end());
      const auto col = ensemble::normalize_scores({test[j].model_id, sorted}, norm);
      for (std::size_t t = 0; t < T; ++t) {
        if (!(col[t] >= 0.0 && col[t] <= 1.0)) ++range_fail;
        if (t > 0 && col[t] < col[t - 1]) ++mono_fail;
      }
    }
    const auto features = ensemble::build_feature_matrix(test, norm);
    ensemble::EnsembleWeights w;
    for (std::size_t j = 0; j < k; ++j) w.w.push_back(rng.uniform_index(5) == 0 ? 0.0 : rng.uniform(0.01, 10.0));
    if (!(w.sum() > 0.0)) w.w[0] = 1.0;
    const auto base = ensemble::aggregate_weighted(ensemble::apply_weights(features, w), w);

    auto pow2 = w;
    const double c2 = std::ldexp(1.0, static_cast<int>(rng.uniform_index(41)) - 20);
    for (auto& v : pow2.w) v *= c2;
    if (ensemble::aggregate_weighted(ensemble::apply_weights(features, pow2), pow2) != base) ++pow2_fail;

    auto any = w;
    const double c = rng.uniform(1e-3, 1e3);
    for (auto& v : any.w) v *= c;
    const auto scaled = ensemble::aggregate_weighted(ensemble::apply_weights(features, any), any);
    for (std::size_t t = 0; t < T; ++t) arbitrary_dev = std::max(arbitrary_dev, std::abs(scaled[t] - base[t]));
    if (ensemble::detect_unsupervised(features, w).flagged != ensemble::detect_unsupervised(features, pow2).flagged) {
      ++flag_fail;
    }
  }
  const bool ok = range_fail == 0 && mono_fail == 0 && pow2_fail == 0 && flag_fail == 0 && arbitrary_dev <= 1e-15;
  return {ok, "10000 cases: out-of-range " + std::to_string(range_fail) + ", non-monotone " +
                  std::to_string(mono_fail) + ", aggregate changed under 2^m scaling " + std::to_string(pow2_fail) +
                  ", flagged set changed " + std::to_string(flag_fail) + ", max deviation under arbitrary scaling " +
                  fmt("%.1e", arbitrary_dev)};
}

// ---------------------------------------------------------------- criterion 4

std::vector<int> random_binary(std::size_t T, double p_start, double p_stay, Rng& rng) {
  std::vector<int> out(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    const bool prev = t > 0 && out[t - 1];
    out[t] = rng.uniform() < (prev ? p_stay : p_start) ? 1 : 0;
  }
  return out;
}

Outcome range_oracle() {
  using eval::RangeSet;
  const bool perfect = eval::range_recall(RangeSet{{{3, 6}}}, RangeSet{{{3, 6}}}, 10) == 1.0 &&
                       eval::range_precision(RangeSet{{{3, 6}}}, RangeSet{{{3, 6}}}, 10) == 1.0;
  const bool half = eval::range_recall(RangeSet{{{0, 9}}}, RangeSet{{{0, 4}}}, 10) == 0.5;
  Rng rng(404);
  std::vector<std::int64_t> grid(200);
  std::iota(grid.begin(), grid.end(), std::int64_t{0});
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto truth = random_binary(200, 0.03, 0.85, rng);
    const auto pred = random_binary(200, 0.05, 0.7, rng);
    std::vector<double> scores(200);
    for (std::size_t t = 0; t < 200; ++t) scores[t] = rng.uniform() + (truth[t] ? rng.uniform(0.0, 0.7) : 0.0);
    const auto R = eval::extract_ranges(truth), P = eval::extract_ranges(pred);
    worst = std::max(worst, std::abs(eval::range_recall(R, P, 200) - oracle::range_recall(truth, pred, 0.0)));
    worst = std::max(worst, std::abs(eval::range_precision(R, P, 200) - oracle::range_precision(truth, pred)));
    const auto report = eval::best_range_f1(scores, LabelSeries::full(grid, truth));
    const auto expected = oracle::best_f1(scores, truth, 100);
    for (auto [a, b] : {std::pair{report.best_f1, expected.f1}, std::pair{report.threshold, expected.threshold},
                        std::pair{report.precision, expected.precision}, std::pair{report.recall, expected.recall}}) {
      worst = std::max(worst, std::abs(a - b));
    }
  }
  const bool ok = perfect && half && worst <= 1e-12;
  return {ok, std::string("perfect match ") + (perfect ? "1.0" : "WRONG") + ", half overlap " +
                  (half ? "0.5" : "WRONG") + ", 100 pairs max |diff| " + fmt("%.1e", worst)};
}

// ---------------------------------------------------------------- criterion 5

constexpr std::uint64_t kSyntheticSeed = 1;
constexpr std::size_t kTrainLength = 3000;

pipeline::PipelineConfig end_to_end_config() {
  auto cfg = pipeline::PipelineConfig::defaults();
  cfg.train.balance_classes = true;
  return cfg;
}

struct EndToEnd {
  pipeline::SyntheticData data;
  pipeline::TrainOutputs unsupervised, supervised, semi;
  std::vector<pipeline::ScoreRow> rows_unsup, rows_full, rows_semi;
};

double held_out_f1(const std::vector<pipeline::ScoreRow>& rows, const LabelSeries& truth, bool classifier) {
  std::vector<double> scores;
  std::vector<std::int64_t> stamps;
  std::vector<int> labels;
  for (const auto& r : rows) {
    if (r.index < kTrainLength) continue;
    scores.push_back(classifier ? r.classifier : r.aggregate);
    stamps.push_back(r.timestamp);
    labels.push_back(truth.labels[r.index]);
  }
  return eval::best_range_f1(scores, LabelSeries::full(stamps, labels)).best_f1;
}

Outcome synthetic_end_to_end(EndToEnd& e2e) {
  e2e.data = pipeline::generate_synthetic(pipeline::SyntheticProfile{}, kSyntheticSeed);
  const auto& data = e2e.data;
  const auto train = data.data.slice(0, kTrainLength);
  const auto full_labels = LabelSeries::full(
      train.timestamps(), std::vector<int>(data.labels.labels.begin(), data.labels.labels.begin() + kTrainLength));
  auto semi_labels = LabelSeries::empty(train.timestamps());
  std::vector<std::size_t> order(kTrainLength);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng pick(derive_seed(kSyntheticSeed, 7));
  pick.shuffle(std::span<std::size_t>(order));
  for (std::size_t i = 0; i < kTrainLength / 10; ++i) {
    semi_labels.mask[order[i]] = true;
    semi_labels.labels[order[i]] = full_labels.labels[order[i]];
  }
  const auto cfg = end_to_end_config();
  e2e.unsupervised = pipeline::train_pipeline(train, nullptr, cfg);
  e2e.supervised = pipeline::train_pipeline(train, &full_labels, cfg);
  e2e.semi = pipeline::train_pipeline(train, &semi_labels, cfg);
  e2e.rows_unsup = pipeline::detect_offline(e2e.unsupervised.model, data.data);
  e2e.rows_full = pipeline::detect_offline(e2e.supervised.model, data.data);
  e2e.rows_semi = pipeline::detect_offline(e2e.semi.model, data.data);

  const double f_unsup = held_out_f1(e2e.rows_unsup, data.labels, false);
  const double f_full = held_out_f1(e2e.rows_full, data.labels, true);
  const double f_semi = held_out_f1(e2e.rows_semi, data.labels, true);

  // Held-out restart events: flagged if any of their rows carries the
  // unsupervised ESD flag; suppressed if the supervised classifier keeps
  // every row below 0.5.
  const std::size_t first_row = e2e.rows_unsup.front().index;
  std::size_t flagged = 0, suppressed = 0, restarts = 0;
  for (const auto& ev : data.events) {
    if (ev.category != "restart" || ev.start < kTrainLength) continue;
    ++restarts;
    bool hit = false;
    double max_prob = 0.0;
    for (std::size_t t = ev.start; t <= ev.end; ++t) {
      if (t < first_row || t - first_row >= e2e.rows_unsup.size()) continue;
      hit = hit || e2e.rows_unsup[t - first_row].flag;
      max_prob = std::max(max_prob, e2e.rows_full[t - first_row].classifier);
    }
    if (hit) {
      ++flagged;
      suppressed += max_prob < 0.5 ? 1 : 0;
    }
  }
  const bool a = f_unsup >= 0.6;
  const bool b = f_full - f_unsup >= 0.10;
  const bool c = flagged > 0 && 2 * suppressed >= flagged;
  const bool d = f_semi >= f_unsup;
  std::size_t anomalies = 0;
  for (const auto& ev : data.events) anomalies += ev.label == 1 ? 1 : 0;
  return {a && b && c && d,
          "seed " + std::to_string(kSyntheticSeed) + ", " + std::to_string(anomalies) + " anomalies + " +
              std::to_string(data.events.size() - anomalies) + " restarts; held-out F1 (a) unsupervised " +
              fmt("%.3f", f_unsup) + (a ? " >= 0.6" : " < 0.6") + "; (b) supervised " + fmt("%.3f", f_full) +
              " (" + fmt("%+.3f", f_full - f_unsup) + ")" + "; (c) restarts suppressed " +
              std::to_string(suppressed) + "/" + std::to_string(flagged) + " flagged (" + std::to_string(restarts) +
              " held out); (d) semi-supervised 10% " + fmt("%.3f", f_semi)};
}

// ---------------------------------------------------------------- criterion 6

std::string scores_csv(const pipeline::DetectionModel& model, const std::vector<pipeline::ScoreRow>& rows) {
  std::ostringstream out;
  pipeline::write_scores_csv(out, model.model_ids, rows);
  return out.str();
}

Outcome stream_equivalence(const EndToEnd& e2e) {
  const auto& model = e2e.supervised.model;
  const auto& ts = e2e.data.data;
  const std::string offline = scores_csv(model, e2e.rows_full);
  std::string detail = std::to_string(e2e.rows_full.size()) + " rows;";
  bool ok = true;
  for (std::size_t batch : {1, 7, 100}) {
    pipeline::StreamContext stream(model);
    std::vector<pipeline::ScoreRow> rows;
    for (std::size_t b = 0; b < ts.length(); b += batch) {
      auto out = stream.append(ts.slice(b, std::min(ts.length(), b + batch)));
      rows.insert(rows.end(), out.begin(), out.end());
    }
    const bool same = scores_csv(model, rows) == offline;
    ok = ok && same;
    detail += " B=" + std::to_string(batch) + (same ? " identical" : " DIFFERENT");
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 7

Outcome determinism(const EndToEnd& e2e) {
  const fs::path root = fs::temp_directory_path() / "ymir_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  write_timeseries_csv(root / "data.csv", e2e.data.data);
  write_labels_csv(root / "labels.csv", e2e.data.labels);
  auto cfg = end_to_end_config().to_json();
  cfg["train"]["epochs"] = 3;
  std::ofstream(root / "config.json") << cfg.dump();

  for (const char* run : {"a", "b"}) {
    pipeline::TrainCommand train;
    train.data = root / "data.csv";
    train.labels = root / "labels.csv";
    train.config = root / "config.json";
    train.out = root / run / "model";
    pipeline::run_train(train);
    pipeline::DetectCommand detect;
    detect.data = root / "data.csv";
    detect.model = root / run / "model";
    detect.out = root / run / "scores";
    pipeline::run_detect(detect);
  }
  std::size_t files = 0, different = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto twin = root / "b" / fs::relative(entry.path(), root / "a");
    if (!fs::exists(twin) || slurp(entry.path()) != slurp(twin)) ++different;
  }
  return {files > 0 && different == 0,
          std::to_string(files) + " artifact/score files compared, " + std::to_string(different) + " differ"};
}

}  // namespace

int main() {
  using Clock = std::chrono::steady_clock;
  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Outcome()>& fn) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const bool in_time = limit_s <= 0 || secs < limit_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::printf("%s %d %s: %s [%.1f s%s]\n", pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs,
                limit_s > 0 ? (in_time ? (" < " + fmt("%.0f", limit_s) + " s").c_str() : " OVER LIMIT") : "");
    std::fflush(stdout);
  };

  EndToEnd e2e;
  report(1, "ESD oracle equivalence", 10, esd_oracle);
  report(2, "gradient checks", 60, gradient_checks);
  report(3, "normalization/aggregation invariants", 0, normalization_invariants);
  report(4, "range-metric oracle", 0, range_oracle);
  report(5, "synthetic end-to-end", 300, [&] { return synthetic_end_to_end(e2e); });
  report(6, "stream/offline equivalence", 0, [&] { return stream_equivalence(e2e); });
  report(7, "determinism", 0, [&] { return determinism(e2e); });
  return failures == 0 ? 0 : 1;
}
