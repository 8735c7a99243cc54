// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepauto/model/dataset.hpp"
#include "deepauto/model/train.hpp"

namespace deepauto::model {

struct GridCandidate {
  std::string label;
  data::WindowSpec window;
  bool use_external = false;
};

struct GridRow {
  GridCandidate candidate;
  std::optional<double> metric;  // validation RMSE of the first horizon, or mean KL
  std::size_t rank = 0;          // 1 = best; 0 when the candidate failed
  std::size_t parameter_count = 0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double seconds = 0.0;
  std::string error;
  std::shared_ptr<const TrainResult> trained;  // kept when requested
};

struct GridReport {
  std::string metric_name;  // "val_rmse" or "val_kl"
  std::vector<GridRow> rows;  // candidate order

  nlohmann::json to_json() const;
  std::string to_table() const;
};

/// The locality / periodicity / seasonality ladder: n_r=5; n_r=20;
/// n_r=20 with one periodic lag; n_r=20 with two periodic lags and
/// external features.
std::vector<GridCandidate> locality_ladder(std::size_t period_steps, std::size_t season_steps);

/// Validation metric of trained parameters on `val`: RMSE of the first
/// horizon for the load task, mean KL for histograms.
double validation_metric(std::span<const data::WindowedSample> val, const DeepAutoParams& params,
                         const DeepAutoConfig& config);

/// Trains one model per candidate on `cells` with the base config's seed
/// and hyperparameters. All candidates share the anchor set of the
/// longest lookback so they see identical splits. A failing candidate is
/// recorded and the grid continues.
GridReport grid_search(const CellSeriesSet& cells, const DeepAutoConfig& base,
                       std::span<const GridCandidate> candidates, const PrepareOptions& options = {},
                       bool keep_models = false);

}  // namespace deepauto::model
