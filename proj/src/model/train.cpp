// SPDX-License-Identifier: Apache-2.0
#include "deepauto/model/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "deepauto/error.hpp"
#include "deepauto/log.hpp"
#include "deepauto/nn/adam.hpp"
#include "deepauto/rng.hpp"

namespace deepauto::model {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shuffle stream decorrelated from the initialisation stream.
constexpr std::uint64_t kShuffleSalt = 0x5f3759df9e3779b9ULL;

}  // namespace

nlohmann::json TrainReport::to_json() const {
  nlohmann::json ep = nlohmann::json::array();
  for (const auto& e : epochs)
    ep.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"seconds", e.seconds}});
  return {{"config", model::to_json(config)},
          {"epochs", ep},
          {"best_epoch", best_epoch},
          {"best_val_loss", best_val_loss},
          {"stopped_early", stopped_early},
          {"wall_seconds", wall_seconds},
          {"train_samples", train_samples},
          {"val_samples", val_samples},
          {"test_metrics", test_metrics}};
}

TrainResult train(std::span<const data::WindowedSample> train, std::span<const data::WindowedSample> val,
                  const DeepAutoConfig& config, const TrainOptions& options) {
  config.validate();
  if (train.empty()) throw DataError("train: empty training split");
  if (val.empty()) throw DataError("train: empty validation split");
  const auto t0 = Clock::now();

  DeepAutoParams params = options.initial ? *options.initial : DeepAutoParams::initialized(config, config.seed);
  GradientBundle grads = zeros_like(params);
  auto named_params = params.named();
  const auto named_grads = std::as_const(grads).named();
  nn::AdamState adam = nn::adam_init(named_params);
  const nn::AdamConfig adam_cfg{.lr = config.lr};
  const LossSpec loss{loss_kind(config), config.alpha};

  Rng shuffle_rng(config.seed ^ kShuffleSalt);
  std::vector<std::size_t> order(train.size());
  std::vector<const data::WindowedSample*> batch;
  BatchGradient parallel;

  TrainResult result{params, {}};
  TrainReport& report = result.report;
  report.config = config;
  report.train_samples = train.size();
  report.val_samples = val.size();
  double best = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto te = Clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      const double l = options.serial ? loss_and_gradients_serial(batch, params, loss, &grads)
                                      : parallel(batch, params, loss, &grads);
      if (!std::isfinite(l)) {
        throw DivergenceError("training diverged: loss " + std::to_string(l) + " in epoch " + std::to_string(epoch) +
                              " at batch starting " + std::to_string(start));
      }
      nn::adam_step(named_params, named_grads, adam, adam_cfg);
      weighted += l * static_cast<double>(end - start);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = weighted / static_cast<double>(train.size());
    rec.val_loss = evaluate_loss(val, params, loss);
    if (options.val_override) rec.val_loss = options.val_override(epoch, rec.val_loss);
    if (!std::isfinite(rec.val_loss)) throw DivergenceError("validation loss is not finite in epoch " + std::to_string(epoch));
    rec.seconds = seconds_since(te);
    report.epochs.push_back(rec);
    log::info("epoch", {{"epoch", epoch}, {"train_loss", rec.train_loss}, {"val_loss", rec.val_loss},
                        {"seconds", rec.seconds}});
    if (options.on_epoch) options.on_epoch(rec);

    if (rec.val_loss < best) {
      best = rec.val_loss;
      report.best_epoch = epoch;
      result.params = params;
    } else if (epoch - report.best_epoch >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }
  report.best_val_loss = best;
  report.wall_seconds = seconds_since(t0);
  return result;
}

}  // namespace deepauto::model
