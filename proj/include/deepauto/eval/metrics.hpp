// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include <json.hpp>

#include "deepauto/nn/tensor.hpp"

namespace deepauto::eval {

double rmse(std::span<const double> y, std::span<const double> yhat);
double mae(std::span<const double> y, std::span<const double> yhat);

/// 100 * mean(|y - yhat| / y) over samples with y > threshold. Empty when
/// no sample qualifies. Throws ConfigError for a threshold outside [0, 1].
std::optional<double> mape_thresholded(std::span<const double> y, std::span<const double> yhat, double threshold);

struct Metrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::optional<double> mape;
  std::size_t samples = 0;
};

Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat, double threshold = 0.7);

/// Mean KL divergence over histogram rows, same rule as training.
double kl_eval(const nn::Tensor2& p, const nn::Tensor2& q);

nlohmann::json to_json(const Metrics& m);

}  // namespace deepauto::eval
