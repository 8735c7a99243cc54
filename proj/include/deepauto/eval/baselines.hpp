// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "deepauto/data/series.hpp"
#include "deepauto/data/windows.hpp"
#include "deepauto/model/network.hpp"

namespace deepauto::eval {

/// Every horizon predicted as y[t-1]. Throws DataError for t = 0.
nn::Vector naive_predict(const data::KpiSeries& series, std::size_t t, std::span<const std::size_t> horizons,
                         std::size_t channel = 0);

/// Each horizon-h average predicted by the same average one period earlier,
/// mean(y[t-P .. t-P+h-1]). Needs t >= P and h <= P.
nn::Vector seasonal_naive_predict(const data::KpiSeries& series, std::size_t t, std::size_t period,
                                  std::span<const std::size_t> horizons, std::size_t channel = 0);

/// Closed-form ridge regression y ~ X w + b.
struct RidgeModel {
  std::vector<double> coef;
  double intercept = 0.0;
  double lambda = 0.0;

  double predict(std::span<const double> x) const;
};

/// Solves (X'X + lambda I) w = X'y, with an unpenalised intercept fitted by
/// centring when `fit_intercept`. Throws DataError if the system is singular.
RidgeModel ridge_fit(const nn::Tensor2& x, std::span<const double> y, double lambda, bool fit_intercept = true);

/// Flattened [x_recent | x_periodic | x_seasonal | external?] of a sample.
nn::Vector sample_features(const data::WindowedSample& s, bool include_external);

/// Common prediction interface for report generation.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual nn::Vector predict(const data::WindowedSample& s) const = 0;
};

/// Last observed value of the target channel (or last histogram row).
class NaivePredictor : public Predictor {
 public:
  explicit NaivePredictor(data::TargetSpec target) : target_(std::move(target)) {}
  std::string name() const override { return "naive"; }
  nn::Vector predict(const data::WindowedSample& s) const override;

 private:
  data::TargetSpec target_;
};

/// seasonal_naive_predict on the series the samples were cut from.
class SeasonalNaivePredictor : public Predictor {
 public:
  SeasonalNaivePredictor(std::span<const data::KpiSeries> series, std::size_t period, data::TargetSpec target)
      : series_(series), period_(period), target_(std::move(target)) {}
  std::string name() const override { return "seasonal_naive"; }
  nn::Vector predict(const data::WindowedSample& s) const override;

 private:
  std::span<const data::KpiSeries> series_;
  std::size_t period_;
  data::TargetSpec target_;
};

/// One ridge model per output dimension over sample_features.
class RidgeArPredictor : public Predictor {
 public:
  void fit(std::span<const data::WindowedSample> train, double lambda, bool include_external);
  std::string name() const override { return "ridge_ar"; }
  nn::Vector predict(const data::WindowedSample& s) const override;

 private:
  std::vector<RidgeModel> models_;
  bool external_ = false;
};

class DeepAutoPredictor : public Predictor {
 public:
  explicit DeepAutoPredictor(std::shared_ptr<const model::DeepAutoParams> params) : params_(std::move(params)) {}
  std::string name() const override { return "deepauto"; }
  nn::Vector predict(const data::WindowedSample& s) const override { return model::forward(s, *params_); }

 private:
  std::shared_ptr<const model::DeepAutoParams> params_;
};

}  // namespace deepauto::eval
