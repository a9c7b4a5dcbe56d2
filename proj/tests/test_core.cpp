#include <cmath>
#include <limits>
#include <sstream>

#include "catch_amalgamated.hpp"

#include "ymir/core/csv.hpp"
#include "ymir/core/timeseries.hpp"
#include "ymir/error.hpp"
#include "ymir/rng.hpp"
#include "ymir/stats.hpp"
#include "ymir/tensor.hpp"

using namespace ymir;

namespace {

TimeSeriesSet parse(const std::string& text) {
  std::istringstream in(text);
  return parse_timeseries_csv(in, "test.csv");
}

TimeSeriesSet column(std::vector<double> v) {
  std::vector<std::int64_t> ts;
  Matrix m(v.size(), 1);
  for (std::size_t t = 0; t < v.size(); ++t) {
    ts.push_back(static_cast<std::int64_t>(60 * t));
    m(t, 0) = v[t];
  }
  return TimeSeriesSet::make(ts, m, {"a"});
}

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

TEST_CASE("csv load builds a T x n set") {
  auto ts = parse("timestamp,cpu,mem\n0,1,2\n60,3,4\n120,5,6\n");
  CHECK(ts.length() == 3);
  CHECK(ts.metric_count() == 2);
  CHECK(ts.step() == 60);
  CHECK(ts.at(2, 1) == 6.0);
  CHECK(ts.metric_names() == std::vector<std::string>{"cpu", "mem"});
}

TEST_CASE("csv rows are sorted by timestamp") {
  auto ts = parse("timestamp,a\n120,3\n0,1\n60,2\n");
  CHECK(ts.timestamps() == std::vector<std::int64_t>{0, 60, 120});
  CHECK(ts.metric(0) == std::vector<double>{1, 2, 3});
}

TEST_CASE("csv missing cell is a parse error naming the line") {
  try {
    parse("timestamp,a,b,c\n0,1,2,3\n60,1,2\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("test.csv:3") != std::string::npos);
  }
}

TEST_CASE("csv non-uniform grid is a structure error") {
  try {
    parse("timestamp,a\n0,1\n60,2\n130,3\n");
    FAIL("expected StructureError");
  } catch (const StructureError& e) {
    CHECK(std::string(e.what()).find("non-uniform spacing") != std::string::npos);
  }
}

TEST_CASE("csv rejects duplicates, bad numbers and empty input") {
  CHECK_THROWS_AS(parse("timestamp,a\n0,1\n0,2\n"), StructureError);
  CHECK_THROWS_AS(parse("timestamp,a\n0,abc\n"), ParseError);
  CHECK_THROWS_AS(parse("timestamp,a\nx,1\n"), ParseError);
  CHECK_THROWS_AS(parse(""), StructureError);
  CHECK_THROWS_AS(parse("timestamp,a\n"), StructureError);
  CHECK_THROWS_AS(parse("time,a\n0,1\n"), ParseError);
  CHECK_THROWS_AS(parse("timestamp,a,a\n0,1,2\n"), StructureError);
}

TEST_CASE("csv keeps NaN cells") {
  auto ts = parse("timestamp,a\n0,1\n60,NaN\n120,3\n");
  CHECK(std::isnan(ts.at(1, 0)));
  CHECK_FALSE(ts.all_finite());
}

TEST_CASE("csv write/read round trip is exact") {
  Rng rng(7);
  Matrix m(50, 3);
  for (auto& v : m.data) v = rng.normal() * 1e3;
  m(4, 1) = 0.1;
  m(5, 2) = -1e-300;
  std::vector<std::int64_t> stamps;
  for (int t = 0; t < 50; ++t) stamps.push_back(1'600'000'000 + 300 * t);
  auto ts = TimeSeriesSet::make(stamps, m, {"x", "y", "z"});
  std::stringstream buf;
  write_timeseries_csv(buf, ts);
  auto back = parse_timeseries_csv(buf);
  CHECK(back == ts);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(kNaN) == "NaN");
}

TEST_CASE("impute interpolates and edge-fills") {
  CHECK(impute_missing(column({1, kNaN, 3})).metric(0) == std::vector<double>{1, 2, 3});
  CHECK(impute_missing(column({kNaN, 5, 5})).metric(0) == std::vector<double>{5, 5, 5});
  CHECK(impute_missing(column({2, 4, kNaN, kNaN})).metric(0) == std::vector<double>{2, 4, 4, 4});
  CHECK(impute_missing(column({0, kNaN, kNaN, 3})).metric(0) == std::vector<double>{0, 1, 2, 3});
  CHECK_THROWS_AS(impute_missing(column({kNaN, kNaN})), DataError);
}

TEST_CASE("labels align to the series grid") {
  auto ts = column({1, 2, 3});
  std::istringstream in("timestamp,label\n60,1\n");
  auto labels = parse_labels_csv(in, ts);
  CHECK(labels.mask == std::vector<bool>{false, true, false});
  CHECK(labels.labels[1] == 1);
  CHECK(labels.labeled_count() == 1);

  std::istringstream empty("");
  auto none = parse_labels_csv(empty, ts);
  CHECK(none.mask == std::vector<bool>{false, false, false});

  std::istringstream off("timestamp,label\n61,1\n");
  CHECK_THROWS_AS(parse_labels_csv(off, ts), AlignmentError);
  std::istringstream off2("timestamp,label\n61,1\n120,0\n");
  auto skipped = parse_labels_csv(off2, ts, UnknownTimestamps::kSkip);
  CHECK(skipped.labeled_count() == 1);

  std::istringstream bad("timestamp,label\n60,2\n");
  CHECK_THROWS_AS(parse_labels_csv(bad, ts), ParseError);
}

TEST_CASE("sliding windows") {
  auto w = sliding_windows(5, 3);
  REQUIRE(w.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(w[i].start == i);
    CHECK(w[i].center == i + 1);
  }
  auto one = sliding_windows(4, 4);
  REQUIRE(one.size() == 1);
  CHECK(one[0].center == 2);
  CHECK_THROWS_AS(sliding_windows(2, 3), SizeError);
  CHECK_THROWS_AS(sliding_windows(2, 0), SizeError);
  CHECK(sliding_windows(10, 3, 4).size() == 2);
}

TEST_CASE("slice keeps names and timestamps") {
  auto ts = column({1, 2, 3, 4});
  auto s = ts.slice(1, 3);
  CHECK(s.timestamps() == std::vector<std::int64_t>{60, 120});
  CHECK(s.metric(0) == std::vector<double>{2, 3});
  CHECK_THROWS_AS(ts.slice(3, 2), SizeError);
}

TEST_CASE("stats helpers") {
  std::vector<double> x{4, 1, 3, 2};
  CHECK(stats::mean(x) == 2.5);
  CHECK(stats::lower_median(x) == 2.0);
  CHECK(stats::population_sd(std::vector<double>{1, 3}) == 1.0);
  CHECK(stats::sample_sd(std::vector<double>{5}) == 0.0);
  std::vector<double> r(100);
  for (int i = 0; i < 100; ++i) r[i] = i;
  CHECK(stats::percentile(r, 0.01) == Catch::Approx(0.99).epsilon(1e-12));
  CHECK(stats::percentile(r, 0.99) == Catch::Approx(98.01).epsilon(1e-12));
}

TEST_CASE("rng is deterministic and derive_seed separates streams") {
  Rng a(3), b(3);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  Rng c(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(c.uniform_index(7) < 7);
  }
}

TEST_CASE("param set json round trip and shape checks") {
  ParamSet p;
  p.tensors.push_back(Tensor::zeros("w", {2, 3}));
  p.tensors.push_back(Tensor::zeros("b", {3}));
  p.flat(4) = 0.25;
  CHECK(p.total_size() == 9);
  auto back = ParamSet::from_json(p.to_json(), p.zeros_like());
  CHECK(back == p);
  ParamSet other;
  other.tensors.push_back(Tensor::zeros("w", {3, 2}));
  other.tensors.push_back(Tensor::zeros("b", {3}));
  CHECK_THROWS_AS(ParamSet::from_json(p.to_json(), other), ShapeError);
}
