// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <numbers>
#include <sstream>

#include "deepauto/data/analysis.hpp"
#include "deepauto/data/causal.hpp"
#include "deepauto/data/records.hpp"
#include "deepauto/data/scaler.hpp"
#include "deepauto/data/series.hpp"
#include "deepauto/data/split.hpp"
#include "deepauto/data/windows.hpp"
#include "deepauto/error.hpp"
#include "deepauto/rng.hpp"
#include "support/oracles.hpp"

using namespace deepauto;
using namespace deepauto::data;
using deepauto::testing::frozen;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Single-channel series; NaN marks a missing entry.
KpiSeries series_of(const std::vector<double>& v, std::int64_t step = 60) {
  KpiSeries s = make_empty_series("c", 0, step, {"load"}, v.size());
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (std::isnan(v[t])) continue;
    s.values(t, 0) = v[t];
    s.missing[t] = 0;
  }
  return s;
}

std::vector<double> interpolated(const std::vector<double>& v) {
  return interpolate_missing(series_of(v)).channel(0);
}

KpiSeries ramp(std::size_t n, std::int64_t step = 60) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return series_of(v, step);
}

}  // namespace

TEST_CASE("records: parse, validate and format round trip") {
  const auto r = parse_record(R"({"topic":"load","cell":"a","ts":120,"value":0.25})");
  CHECK(r.topic == Topic::load);
  CHECK(r.cell == "a");
  CHECK(r.ts == 120);
  CHECK(r.value == 0.25);
  CHECK(parse_record(format_record(r)) == r);

  CHECK_THROWS_AS(parse_record("{not json"), DataError);
  CHECK_THROWS_AS(parse_record(R"({"topic":"load","cell":"a","ts":1})"), DataError);
  CHECK_THROWS_AS(parse_record(R"({"topic":"power2","cell":"a","ts":1,"value":1})"), DataError);

  CHECK(validate_record({Topic::load, "a", 0, 1.2}).has_value());
  CHECK(validate_record({Topic::ue, "a", 0, -1}).has_value());
  CHECK(validate_record({Topic::rsrq, "a", 0, 3.5}).has_value());
  CHECK(validate_record({Topic::rsrq, "a", 0, 35}).has_value());
  CHECK_FALSE(validate_record({Topic::rsrq, "a", 0, 34}).has_value());
  CHECK_FALSE(validate_record({Topic::load, "a", 0, 1.0}).has_value());
}

TEST_CASE("records: reader counts malformed and out-of-range lines") {
  std::stringstream in;
  for (int i = 0; i < 100; ++i) in << format_record({Topic::load, "a", i * 60, 0.5}) << '\n';
  in << "garbage\n\n" << R"({"topic":"load","cell":"a","ts":0,"value":7})" << '\n';
  ReadStats stats;
  const auto recs = read_records(in, &stats);
  CHECK(recs.size() == 100);
  CHECK(stats.accepted == 100);
  CHECK(stats.malformed == 1);
  CHECK(stats.out_of_range == 1);
}

TEST_CASE("bucket_of floors toward negative infinity") {
  CHECK(bucket_of(0, 60) == 0);
  CHECK(bucket_of(59, 60) == 0);
  CHECK(bucket_of(60, 60) == 1);
  CHECK(bucket_of(-1, 60) == -1);
  CHECK(bucket_of(-60, 60) == -1);
}

TEST_CASE("build_series averages duplicates and aligns cells") {
  std::vector<CellRecord> recs{
      {Topic::load, "b", 0, 0.4},   {Topic::load, "b", 30, 0.6}, {Topic::ue, "b", 10, 10},
      {Topic::load, "a", 120, 0.2}, {Topic::band, "a", 0, 700},  {Topic::rsrq, "a", 60, 3},
  };
  const auto series = build_series(recs, Task::load, 60);
  REQUIRE(series.size() == 2);
  CHECK(series[0].cell_id == "a");
  CHECK(series[1].cell_id == "b");
  for (const auto& s : series) {
    CHECK(s.start_ts == 0);
    CHECK(s.length() == 3);
  }
  CHECK(series[1].values(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(series[1].values(0, 1) == 10);
  CHECK(series[1].is_missing(1, 0));
  CHECK(series[0].is_missing(0, 0));
  CHECK(series[0].values(2, 0) == 0.2);
  // configuration carries forward
  CHECK(series[0].cell_config(2, 0) == 700);
}

TEST_CASE("interpolation examples") {
  CHECK(interpolated({1, kNaN, 3}) == std::vector<double>{1, 2, 3});
  CHECK(interpolated({kNaN, 2, kNaN}) == std::vector<double>{2, 2, 2});
  const auto v = interpolated({0, kNaN, kNaN, 0.9});
  CHECK(v[0] == 0.0);
  CHECK(v[1] == doctest::Approx(frozen("interp_gap_1")).epsilon(1e-15));
  CHECK(v[2] == doctest::Approx(frozen("interp_gap_2")).epsilon(1e-15));
  CHECK(v[3] == 0.9);
  const auto filled = interpolate_missing(series_of({0, kNaN, 1}));
  CHECK(filled.fully_present());
}

TEST_CASE("interpolation rejects an all-missing channel naming the cell") {
  KpiSeries s = series_of({kNaN, kNaN});
  s.cell_id = "cell_042";
  try {
    (void)interpolate_missing(s);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("cell_042") != std::string::npos);
    CHECK(std::string(e.what()).find("load") != std::string::npos);
  }
}

TEST_CASE("interpolation is idempotent (random property)") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng.below(40));
    for (auto& x : v) x = rng.bernoulli(0.4) ? kNaN : rng.uniform();
    if (std::all_of(v.begin(), v.end(), [](double x) { return std::isnan(x); })) v[0] = 0.5;
    const auto once = interpolate_missing(series_of(v));
    const auto twice = interpolate_missing(once);
    CHECK(once.values == twice.values);
  }
}

TEST_CASE("causal buffer equals interpolation of every prefix") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(50);
    const std::size_t cap = 1 + rng.below(n + 3);
    std::vector<double> v(n);
    for (auto& x : v) x = rng.bernoulli(0.35) ? kNaN : rng.uniform();
    const KpiSeries raw = series_of(v);
    CausalBuffer buf(1, cap);
    bool seen = false;
    for (std::size_t t = 0; t < n; ++t) {
      buf.push_row(raw, t);
      seen = seen || !std::isnan(v[t]);
      if (!seen) {
        CHECK_FALSE(buf.ready(1));
        continue;
      }
      std::vector<double> prefix(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(t + 1));
      const auto expect = interpolated(prefix);
      const std::size_t k = std::min(cap, t + 1);
      REQUIRE(buf.ready(k));
      const auto tail = buf.tail(k, "c", 60, {"load"});
      CHECK(tail.start_ts == static_cast<std::int64_t>((t + 1 - k) * 60));
      for (std::size_t i = 0; i < k; ++i) CHECK(tail.values(i, 0) == expect[t + 1 - k + i]);
    }
  }
}

TEST_CASE("scaler examples and round trip") {
  nn::Tensor2 train(2, 1, std::vector<double>{0, 10});
  const auto s = fit_scaler(train);
  CHECK(apply_scaler(s, 0, 5.0) == 0.5);

  nn::Tensor2 train2(2, 1, std::vector<double>{2, 8});
  const auto s2 = fit_scaler(train2);
  CHECK(apply_scaler(s2, 0, 11.0) == 1.0);
  CHECK(apply_scaler(s2, 0, -3.0) == 0.0);

  Rng rng(3);
  nn::Tensor2 m(50, 3);
  for (auto& v : m.values()) v = rng.uniform(-100, 100);
  const auto fitted = fit_scaler(m);
  nn::Tensor2 x = m;
  apply_scaler(fitted, x);
  invert_scaler(fitted, x);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(x[i] - m[i]) <= 1e-12 * std::max(1.0, std::abs(m[i])));

  nn::Tensor2 constant(3, 1, 4.0);
  const auto sc = fit_scaler(constant);
  CHECK(sc.any_constant());
  CHECK(apply_scaler(sc, 0, 4.0) == 0.0);
}

TEST_CASE("scaler only sees rows before row_end") {
  std::vector<KpiSeries> cells{series_of({0, 1, 2, 100}), series_of({3, 4, 5, -50})};
  const auto a = fit_scaler(cells, 3);
  CHECK(a.min[0] == 0);
  CHECK(a.max[0] == 5);
  cells[0].values(3, 0) = 1e6;  // test rows change, parameters do not
  CHECK(fit_scaler(cells, 3) == a);
  const auto fixed = fit_scaler(cells, 3, {std::pair{0.0, 1.0}});
  CHECK(fixed.min[0] == 0.0);
  CHECK(fixed.max[0] == 1.0);
}

TEST_CASE("split 4:1:1 counts") {
  auto check = [](std::size_t n, std::size_t tr, std::size_t va, std::size_t te) {
    const auto b = split_4_1_1(n);
    CHECK(b.train_size() == tr);
    CHECK(b.val_size() == va);
    CHECK(b.test_size() == te);
  };
  check(600, 400, 100, 100);
  check(6, 4, 1, 1);
  check(601, 400, 100, 101);
  CHECK_THROWS_AS(split_4_1_1(5), DataError);
  for (std::size_t n = 6; n < 400; ++n) {
    const auto b = split_4_1_1(n);
    CHECK(b.train_size() + b.val_size() + b.test_size() == n);
  }
  std::vector<int> items(12);
  std::iota(items.begin(), items.end(), 0);
  const auto p = split_4_1_1(items);
  CHECK(p.train.back() == 7);
  CHECK(p.val.front() == 8);
  CHECK(p.test.front() == 10);
}

TEST_CASE("window lags follow the definition") {
  WindowSpec spec{3, 0, 0, 96, 672};
  TargetSpec target;
  target.horizons = {1};
  const auto s = build_sample(ramp(200), 100, spec, target, true);
  REQUIRE(s.x_recent.rows() == 3);
  CHECK(s.x_recent(0, 0) == 97);
  CHECK(s.x_recent(1, 0) == 98);
  CHECK(s.x_recent(2, 0) == 99);
  CHECK(s.target == nn::Vector{100});

  WindowSpec daily{3, 2, 0, 1440, 10080};
  const auto p = build_sample(ramp(3100), 3000, daily, target, true);
  REQUIRE(p.x_periodic.rows() == 2);
  CHECK(p.x_periodic(0, 0) == 120);
  CHECK(p.x_periodic(1, 0) == 1560);

  WindowSpec weekly{2, 1, 2, 4, 10};
  const auto w = build_sample(ramp(40), 25, weekly, target, true);
  CHECK(w.x_seasonal(0, 0) == 5);
  CHECK(w.x_seasonal(1, 0) == 15);
}

TEST_CASE("valid anchors: length 10, n_r 3, horizon 1 gives 7 samples") {
  WindowSpec spec{3, 0, 0, 96, 672};
  TargetSpec target;
  target.horizons = {1};
  const auto res = make_windows(ramp(10), spec, target);
  REQUIRE(res.samples.size() == 7);
  CHECK(res.samples.front().anchor_t == 3);
  CHECK(res.samples.back().anchor_t == 9);

  WindowSpec too_long{20, 0, 0, 96, 672};
  const auto none = make_windows(ramp(10), too_long, target);
  CHECK(none.samples.empty());
  CHECK_FALSE(none.diagnostic.empty());
}

TEST_CASE("windowing never reads outside the series (random property)") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    WindowSpec spec;
    spec.n_recent = 1 + rng.below(6);
    spec.period_steps = spec.n_recent + 1 + rng.below(5);
    spec.season_steps = spec.period_steps + rng.below(8);
    spec.n_periodic = rng.below(3);
    spec.n_seasonal = rng.below(3);
    TargetSpec target;
    target.horizons = {1, 1 + rng.below(4)};
    const std::size_t T = 1 + rng.below(60);
    const auto res = make_windows(ramp(T), spec, target);
    std::size_t brute = 0;
    for (std::size_t t = 0; t < T; ++t)
      if (t >= spec.lookback() && t + target.reach() <= T) ++brute;
    CHECK(res.samples.size() == brute);
    for (const auto& s : res.samples) {
      for (const auto* m : {&s.x_recent, &s.x_periodic, &s.x_seasonal})
        for (double v : *m) CHECK((v >= 0 && v < static_cast<double>(T)));
      for (double v : s.target) CHECK((v >= 0 && v < static_cast<double>(T)));
    }
  }
}

TEST_CASE("aggregate targets") {
  const auto r = ramp(100);
  const std::vector<std::size_t> h{1, 15, 60};
  const auto v = aggregate_targets(r, 0, h);
  CHECK(v[0] == 0);
  CHECK(v[1] == doctest::Approx(frozen("ramp_mean_15")).epsilon(1e-15));
  CHECK(v[2] == doctest::Approx(frozen("ramp_mean_60")).epsilon(1e-15));
  const std::vector<std::size_t> one{1};
  CHECK(aggregate_targets(r, 5, one) == nn::Vector{5});
  const auto c = aggregate_targets(series_of(std::vector<double>(80, 0.3)), 2, h);
  for (double x : c) CHECK(x == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("external features encode calendar and configuration") {
  // 2024-01-01 00:00 UTC was a Monday
  const std::vector<double> cfg{1900, 43, 10};
  const auto e = ExternalFeatures::at(1704067200 + 6 * 3600 + 30 * 60, cfg);
  CHECK(e.day_of_week[0] == 1.0);
  CHECK(e.hour_sin == doctest::Approx(1.0));
  CHECK(std::abs(e.hour_cos) < 1e-12);
  CHECK(std::abs(e.minute_sin) < 1e-12);
  CHECK(e.minute_cos == doctest::Approx(-1.0));
  const auto v = e.to_vector();
  CHECK(v.size() == ExternalFeatures::kSize);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto f = ExternalFeatures::at(static_cast<std::int64_t>(rng.below(4'000'000'000ULL)), cfg);
    double one_hot = 0;
    for (double d : f.day_of_week) one_hot += d;
    CHECK(one_hot == 1.0);
    CHECK(std::abs(f.hour_sin * f.hour_sin + f.hour_cos * f.hour_cos - 1.0) <= 1e-12);
    CHECK(std::abs(f.minute_sin * f.minute_sin + f.minute_cos * f.minute_cos - 1.0) <= 1e-12);
  }
}

TEST_CASE("autocorrelation") {
  std::vector<double> sine(2000);
  for (std::size_t t = 0; t < sine.size(); ++t) sine[t] = std::sin(2 * std::numbers::pi * static_cast<double>(t) / 50);
  const auto acf = autocorrelation(sine, 60);
  CHECK(acf[0] == 1.0);
  CHECK(acf[50] >= 0.97);  // the biased estimator shrinks by (n - k) / n
  CHECK(acf[25] < -0.9);

  Rng rng(1);
  std::vector<double> noise(10000);
  for (auto& x : noise) x = rng.normal();
  const auto wn = autocorrelation(noise, 100);
  for (std::size_t k = 1; k <= 100; ++k) CHECK(std::abs(wn[k]) < 0.05);

  CHECK_THROWS_AS(autocorrelation(std::vector<double>(10, 1.0), 3), DataError);
  CHECK_THROWS_AS(autocorrelation(sine, 2000), DataError);
}

TEST_CASE("rsrq histograms") {
  std::vector<RsrqReport> one{{0, 10}};
  const auto h1 = rsrq_histogram(one);
  CHECK(h1.pdf(0, 10) == 1.0);

  std::vector<RsrqReport> edges{{0, 0}, {1, 0}, {2, 34}, {3, 34}, {4, 35}};
  const auto h2 = rsrq_histogram(edges);
  CHECK(h2.pdf(0, 0) == 0.5);
  CHECK(h2.pdf(0, 34) == 0.5);
  CHECK(h2.rejected == 1);

  std::vector<RsrqReport> gap{{0, 1}, {900, 2}};
  const auto h3 = rsrq_histogram(gap);
  REQUIRE(h3.pdf.rows() == 4);
  CHECK(h3.missing == std::vector<std::uint8_t>{0, 1, 1, 0});

  Rng rng(4);
  std::vector<RsrqReport> uniform;
  for (int i = 0; i < 35000; ++i) uniform.push_back({static_cast<std::int64_t>(rng.below(300)), static_cast<int>(rng.below(35))});
  const auto h4 = rsrq_histogram(uniform);
  double sum = 0;
  for (std::size_t b = 0; b < 35; ++b) {
    sum += h4.pdf(0, b);
    // 5 binomial standard deviations at n = 35000, p = 1/35
    CHECK(std::abs(h4.pdf(0, b) - 1.0 / 35) < 5 * std::sqrt((1.0 / 35) * (34.0 / 35) / 35000));
  }
  CHECK(std::abs(sum - 1.0) < 1e-9);
}
