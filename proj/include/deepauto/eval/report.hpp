// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepauto/eval/baselines.hpp"
#include "deepauto/eval/metrics.hpp"

namespace deepauto::eval {

struct CompareRow {
  std::string algorithm;
  std::size_t horizon = 0;
  Metrics metrics;
};

struct CompareFailure {
  std::string algorithm;
  std::string message;
};

/// Algorithm x horizon metric table.
struct CompareReport {
  std::vector<CompareRow> rows;
  std::vector<CompareFailure> failures;
  double threshold = 0.7;

  /// {"rows":[{"algorithm","horizon","rmse","mae","mape"|null}], "failures":[...]}
  nlohmann::json to_json() const;
  std::string to_table() const;
  /// Throws Error when the pair is absent.
  const CompareRow& find(std::string_view algorithm, std::size_t horizon) const;
};

/// Evaluates every predictor on `samples` per horizon. A predictor that
/// throws is reported under failures and the rest still run. Rows follow
/// `predictors` order, then `horizons` order.
CompareReport compare_report(std::span<const Predictor* const> predictors,
                             std::span<const data::WindowedSample> samples, std::span<const std::size_t> horizons,
                             double threshold = 0.7);

/// Mean KL of each predictor's histograms against the sample targets.
struct KlRow {
  std::string algorithm;
  double kl = 0.0;
};
std::vector<KlRow> compare_kl(std::span<const Predictor* const> predictors,
                              std::span<const data::WindowedSample> samples);

}  // namespace deepauto::eval
