#include <cmath>

#include "catch_amalgamated.hpp"

#include "oracles.hpp"
#include "ymir/ensemble/ensemble.hpp"
#include "ymir/ensemble/esd.hpp"
#include "ymir/ensemble/student_t.hpp"
#include "ymir/error.hpp"
#include "ymir/rng.hpp"

using namespace ymir;
using namespace ymir::ensemble;

namespace {

FeatureMatrix features(std::vector<std::vector<double>> columns) {
  FeatureMatrix f;
  f.values = Matrix(columns[0].size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    f.model_ids.push_back("c" + std::to_string(j));
    for (std::size_t t = 0; t < columns[j].size(); ++t) f.values(t, j) = columns[j][t];
  }
  return f;
}

}  // namespace

TEST_CASE("normalizer quantiles") {
  std::vector<double> r(100);
  for (int i = 0; i < 100; ++i) r[i] = i;
  std::vector<RawScoreSeries> raw{{"a", r}, {"b", std::vector<double>(10, 3.0)}, {"c", {7.5}}};
  const auto norm = fit_normalizer(raw);
  CHECK(norm.ranges()[0].q01 == Catch::Approx(oracle::percentile(r, 0.01)).epsilon(1e-12));
  CHECK(norm.ranges()[0].q99 == Catch::Approx(oracle::percentile(r, 0.99)).epsilon(1e-12));
  CHECK(norm.ranges()[0].q01 == Catch::Approx(0.99).epsilon(1e-12));
  CHECK(norm.ranges()[0].q99 == Catch::Approx(98.01).epsilon(1e-12));
  CHECK(norm.ranges()[1].q01 == 3.0);
  CHECK(norm.ranges()[1].q99 == 3.0);
  CHECK(norm.ranges()[2].q01 == 7.5);
  CHECK(norm.ranges()[2].q99 == 7.5);
  CHECK(norm.index_of("b") == 1);
  CHECK_THROWS_AS(norm.index_of("zz"), RegistryError);

  const auto back = Normalizer::from_json(norm.to_json());
  CHECK(back.model_ids() == norm.model_ids());
  CHECK(back.ranges()[0].q99 == norm.ranges()[0].q99);
}

TEST_CASE("normalize clips and handles degenerate ranges") {
  Normalizer norm({"a", "b"}, {{0.0, 10.0}, {4.0, 4.0}});
  CHECK(norm.normalize(0, 5.0) == 0.5);
  CHECK(norm.normalize(0, 20.0) == 1.0);
  CHECK(norm.normalize(0, -3.0) == 0.0);
  CHECK(norm.normalize(1, 100.0) == 0.0);
  const auto col = normalize_scores({"b", {1.0, 4.0, 9.0}}, norm);
  CHECK(col == std::vector<double>{0, 0, 0});
}

TEST_CASE("weights") {
  const auto f = features({{0.8}, {0.4}});
  CHECK(apply_weights(f, EnsembleWeights::uniform(2)).values == f.values);
  const auto w = apply_weights(f, {{2.0, 0.0}});
  CHECK(w.values(0, 0) == 1.6);
  CHECK(w.values(0, 1) == 0.0);
  CHECK_THROWS_AS(apply_weights(f, {{-1.0, 1.0}}), ParameterError);
  CHECK_THROWS_AS(aggregate_weighted(f, {{0.0, 0.0}}), ParameterError);
  CHECK_THROWS_AS(apply_weights(f, {{1.0}}), ShapeError);
}

TEST_CASE("aggregate") {
  const auto one = features({{0.1, 0.7, 0.3}});
  CHECK(aggregate_weighted(one, EnsembleWeights::uniform(1)) == std::vector<double>{0.1, 0.7, 0.3});
  const auto two = features({{0.2}, {0.8}});
  CHECK(aggregate_weighted(apply_weights(two, EnsembleWeights::uniform(2)), EnsembleWeights::uniform(2))[0] ==
        Catch::Approx(0.5));
  const auto tw = features({{1.0}, {0.0}});
  EnsembleWeights w{{3.0, 1.0}};
  CHECK(aggregate_weighted(apply_weights(tw, w), w)[0] == 0.75);
}

TEST_CASE("student t quantile agrees with boost") {
  for (double dof : {1.0, 2.0, 3.0, 5.0, 10.0, 47.0, 250.0}) {
    for (double p : {0.5, 0.9, 0.975, 0.99, 0.9995, 0.99999}) {
      const double expected = boost::math::quantile(boost::math::students_t(dof), p);
      CHECK(student_t_quantile(p, dof) == Catch::Approx(expected).epsilon(1e-9));
      CHECK(student_t_cdf(expected, dof) == Catch::Approx(p).epsilon(1e-10));
    }
  }
}

TEST_CASE("esd hand case and guards") {
  std::vector<double> x(9, 0.0);
  x.push_back(10.0);
  CHECK(generalized_esd(x, 0.05, 3) == std::vector<std::size_t>{9});
  const GeneralizedEsd esd(10, 0.05, 3);
  CHECK(esd.critical_values()[0] == Catch::Approx(2.29).margin(0.005));
  CHECK(oracle::rosner_esd(x, 0.05, 3) == std::vector<std::size_t>{9});

  CHECK(generalized_esd(std::vector<double>(20, 1.5)).empty());
  CHECK_THROWS_AS(generalized_esd(std::vector<double>{1.0, 2.0}), SizeError);
  CHECK_THROWS_AS(GeneralizedEsd(10, 1.5), ParameterError);
  CHECK(default_max_outliers(10) == 1);
  CHECK(default_max_outliers(51) == 2);
}

TEST_CASE("esd agrees with the Rosner oracle on random series") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + static_cast<std::size_t>(rng.uniform_index(48));
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    const std::size_t spikes = static_cast<std::size_t>(rng.uniform_index(3));
    for (std::size_t s = 0; s < spikes; ++s) x[rng.uniform_index(n)] += rng.uniform(3.0, 8.0);
    const std::size_t r = 1 + static_cast<std::size_t>(rng.uniform_index(std::max<std::size_t>(n / 3, 1)));
    INFO("trial " << trial << " n=" << n << " r=" << r);
    CHECK(generalized_esd(x, 0.05, r) == oracle::rosner_esd(x, 0.05, r));
  }
}

TEST_CASE("detect_unsupervised") {
  const auto zeros = features({std::vector<double>(30, 0.0), std::vector<double>(30, 0.0)});
  CHECK(detect_unsupervised(zeros, EnsembleWeights::uniform(2)).flagged.empty());

  std::vector<double> col(30, 0.0);
  col[12] = 1.0;
  const std::size_t k = 4;
  std::vector<std::vector<double>> cols(k, std::vector<double>(30, 0.0));
  cols[2] = col;
  const auto f = features(cols);
  const auto result = detect_unsupervised(f, EnsembleWeights::uniform(k));
  CHECK(result.flagged == std::vector<std::size_t>{12});
  CHECK(result.confidence.at(12) == 1.0 / static_cast<double>(k));

  EnsembleWeights scaled{std::vector<double>(k, 8.0)};
  const auto again = detect_unsupervised(f, scaled);
  CHECK(again.flagged == result.flagged);
  CHECK(again.confidence == result.confidence);
  CHECK(result.to_json().at("flagged") == nlohmann::json::array({12}));
}
