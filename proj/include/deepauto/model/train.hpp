// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "deepauto/data/windows.hpp"
#include "deepauto/model/config.hpp"
#include "deepauto/model/network.hpp"

namespace deepauto::model {

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  DeepAutoConfig config;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  bool stopped_early = false;
  double wall_seconds = 0.0;
  std::size_t train_samples = 0;
  std::size_t val_samples = 0;
  nlohmann::json test_metrics = nullptr;  // filled by the caller

  nlohmann::json to_json() const;
};

struct TrainOptions {
  /// Replaces the measured validation loss of an epoch (testing hook).
  std::function<double(std::size_t epoch, double measured)> val_override;
  /// Called after every epoch.
  std::function<void(const EpochRecord&)> on_epoch;
  /// Use the serial gradient kernel instead of the OpenMP one.
  bool serial = false;
  /// Start from these parameters instead of the seeded initialisation.
  std::optional<DeepAutoParams> initial;
};

struct TrainResult {
  DeepAutoParams params;  // best-validation parameters
  TrainReport report;
};

/// Mini-batch Adam over `train` with a seeded shuffle per epoch. Stops
/// after max_epochs or when validation loss has not improved for
/// `patience` epochs. Throws DivergenceError on a non-finite loss.
TrainResult train(std::span<const data::WindowedSample> train, std::span<const data::WindowedSample> val,
                  const DeepAutoConfig& config, const TrainOptions& options = {});

}  // namespace deepauto::model
