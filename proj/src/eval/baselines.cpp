// SPDX-License-Identifier: Apache-2.0
#include "deepauto/eval/baselines.hpp"

#include <Eigen/Dense>

#include "deepauto/error.hpp"

namespace deepauto::eval {

nn::Vector naive_predict(const data::KpiSeries& series, std::size_t t, std::span<const std::size_t> horizons,
                         std::size_t channel) {
  if (t == 0) throw DataError("naive_predict: no observation before t = 0");
  if (t > series.length()) throw DataError("naive_predict: anchor past the end of the series");
  return nn::Vector(horizons.size(), series.values(t - 1, channel));
}

nn::Vector seasonal_naive_predict(const data::KpiSeries& series, std::size_t t, std::size_t period,
                                  std::span<const std::size_t> horizons, std::size_t channel) {
  if (period == 0) throw ConfigError("seasonal_naive_predict: period must be positive");
  if (t < period) throw DataError("seasonal_naive_predict: anchor precedes one full period of history");
  if (t > series.length()) throw DataError("seasonal_naive_predict: anchor past the end of the series");
  nn::Vector out;
  for (std::size_t h : horizons) {
    if (h == 0 || h > period) throw ConfigError("seasonal_naive_predict: horizon must lie in [1, period]");
    double s = 0.0;
    for (std::size_t k = 0; k < h; ++k) s += series.values(t - period + k, channel);
    out.push_back(s / static_cast<double>(h));
  }
  return out;
}

double RidgeModel::predict(std::span<const double> x) const {
  if (x.size() != coef.size()) throw ShapeError("ridge predict: feature count mismatch");
  double y = intercept;
  for (std::size_t i = 0; i < x.size(); ++i) y += coef[i] * x[i];
  return y;
}

RidgeModel ridge_fit(const nn::Tensor2& x, std::span<const double> y, double lambda, bool fit_intercept) {
  if (x.rows() != y.size()) throw ShapeError("ridge_fit: row count differs from target count");
  if (x.rows() == 0 || x.cols() == 0) throw DataError("ridge_fit: empty design matrix");
  if (!(lambda >= 0.0)) throw ConfigError("ridge_fit: lambda must be >= 0");
  const auto n = static_cast<Eigen::Index>(x.rows()), d = static_cast<Eigen::Index>(x.cols());
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(x.data(), n, d);
  Eigen::Map<const Eigen::VectorXd> Y(y.data(), n);

  Eigen::RowVectorXd x_mean = Eigen::RowVectorXd::Zero(d);
  double y_mean = 0.0;
  if (fit_intercept) {
    x_mean = X.colwise().mean();
    y_mean = Y.mean();
  }
  const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
  const Eigen::VectorXd Yc = Y.array() - y_mean;
  Eigen::MatrixXd A = Xc.transpose() * Xc;
  A.diagonal().array() += lambda;
  const Eigen::VectorXd rhs = Xc.transpose() * Yc;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  const double min_pivot = ldlt.vectorD().cwiseAbs().minCoeff();
  if (ldlt.info() != Eigen::Success || !(min_pivot > 1e-12 * scale))
    throw DataError("ridge_fit: normal equations are singular; use lambda > 0");
  const Eigen::VectorXd w = ldlt.solve(rhs);

  RidgeModel m;
  m.lambda = lambda;
  m.coef.assign(w.data(), w.data() + d);
  m.intercept = fit_intercept ? y_mean - x_mean.dot(w) : 0.0;
  return m;
}

nn::Vector sample_features(const data::WindowedSample& s, bool include_external) {
  nn::Vector f;
  f.reserve(s.x_recent.size() + s.x_periodic.size() + s.x_seasonal.size() + s.external.size());
  for (const auto* m : {&s.x_recent, &s.x_periodic, &s.x_seasonal}) f.insert(f.end(), m->begin(), m->end());
  if (include_external) f.insert(f.end(), s.external.begin(), s.external.end());
  return f;
}

nn::Vector NaivePredictor::predict(const data::WindowedSample& s) const {
  if (s.x_recent.rows() == 0) throw ShapeError("naive predictor needs at least one recent step");
  const auto last = s.x_recent.row(s.x_recent.rows() - 1);
  if (target_.kind == data::TargetSpec::Kind::histogram) {
    if (target_.width > last.size()) throw ShapeError("naive predictor: histogram wider than the input");
    return nn::Vector(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(target_.width));
  }
  return nn::Vector(target_.horizons.size(), last[target_.channel]);
}

nn::Vector SeasonalNaivePredictor::predict(const data::WindowedSample& s) const {
  if (s.cell_index >= series_.size()) throw ShapeError("seasonal naive: sample from an unknown series");
  if (target_.kind == data::TargetSpec::Kind::histogram) {
    const auto& ser = series_[s.cell_index];
    if (s.anchor_t < period_) throw DataError("seasonal naive: insufficient history");
    const auto row = ser.values.row(s.anchor_t - period_);
    return nn::Vector(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(target_.width));
  }
  return seasonal_naive_predict(series_[s.cell_index], s.anchor_t, period_, target_.horizons, target_.channel);
}

void RidgeArPredictor::fit(std::span<const data::WindowedSample> train, double lambda, bool include_external) {
  if (train.empty()) throw DataError("ridge AR: empty training set");
  external_ = include_external;
  const std::size_t d = sample_features(train.front(), external_).size();
  const std::size_t k = train.front().target.size();
  nn::Tensor2 x(train.size(), d);
  nn::Tensor2 y(k, train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto f = sample_features(train[i], external_);
    if (f.size() != d || train[i].target.size() != k) throw ShapeError("ridge AR: inconsistent sample shapes");
    std::copy(f.begin(), f.end(), x.row(i).begin());
    for (std::size_t j = 0; j < k; ++j) y(j, i) = train[i].target[j];
  }
  models_.clear();
  for (std::size_t j = 0; j < k; ++j) models_.push_back(ridge_fit(x, y.row(j), lambda));
}

nn::Vector RidgeArPredictor::predict(const data::WindowedSample& s) const {
  if (models_.empty()) throw Error("ridge AR predictor used before fit");
  const auto f = sample_features(s, external_);
  nn::Vector out;
  for (const auto& m : models_) out.push_back(m.predict(f));
  return out;
}

}  // namespace deepauto::eval
