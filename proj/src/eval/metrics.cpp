// SPDX-License-Identifier: Apache-2.0
#include "deepauto/eval/metrics.hpp"

#include <cmath>

#include "deepauto/error.hpp"
#include "deepauto/nn/losses.hpp"

namespace deepauto::eval {
namespace {

void check(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size())
    throw ShapeError("metrics: " + std::to_string(y.size()) + " targets vs " + std::to_string(yhat.size()) +
                     " predictions");
  if (y.empty()) throw DataError("metrics: no samples");
}

}  // namespace

double rmse(std::span<const double> y, std::span<const double> yhat) {
  check(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return std::sqrt(s / static_cast<double>(y.size()));
}

double mae(std::span<const double> y, std::span<const double> yhat) {
  check(y, yhat);
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += std::abs(y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

std::optional<double> mape_thresholded(std::span<const double> y, std::span<const double> yhat, double threshold) {
  check(y, yhat);
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("MAPE threshold must lie in [0, 1]");
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > threshold) {
      s += std::abs(y[i] - yhat[i]) / y[i];
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return 100.0 * s / static_cast<double>(n);
}

Metrics compute_metrics(std::span<const double> y, std::span<const double> yhat, double threshold) {
  return {rmse(y, yhat), mae(y, yhat), mape_thresholded(y, yhat, threshold), y.size()};
}

double kl_eval(const nn::Tensor2& p, const nn::Tensor2& q) { return nn::kl_loss(p, q); }

nlohmann::json to_json(const Metrics& m) {
  nlohmann::json j{{"rmse", m.rmse}, {"mae", m.mae}, {"samples", m.samples}};
  j["mape"] = m.mape ? nlohmann::json(*m.mape) : nlohmann::json(nullptr);
  return j;
}

}  // namespace deepauto::eval
