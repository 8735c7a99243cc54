// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepauto/data/series.hpp"
#include "deepauto/data/windows.hpp"

namespace deepauto::model {

/// Output head: one sigmoid unit per horizon, or a softmax over histogram bins.
struct OutputSpec {
  enum class Kind { scalar_horizons, pdf };

  Kind kind = Kind::scalar_horizons;
  std::vector<std::size_t> horizons{1, 15, 60};
  std::size_t bins = data::kRsrqBins;

  std::size_t dim() const noexcept { return kind == Kind::scalar_horizons ? horizons.size() : bins; }
  bool operator==(const OutputSpec&) const = default;
};

struct DeepAutoConfig {
  data::Task task = data::Task::load;
  std::int64_t step_seconds = 60;
  data::WindowSpec window;
  std::size_t spatial_k = 0;
  std::size_t input_dim = 2;  // base channels x (1 + spatial_k)
  std::size_t hidden_r = 32;
  std::size_t hidden_p = 32;
  std::size_t hidden_s = 32;
  bool use_external = true;
  std::size_t ext_embed_dim = 16;
  OutputSpec output;
  double alpha = 4.0;
  double lr = 0.005;
  std::size_t batch_size = 1024;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  std::uint64_t seed = 7;

  /// Channels per cell before spatial augmentation.
  std::size_t base_channels() const noexcept;
  /// Recomputes input_dim from the task and spatial_k.
  void derive_input_dim() noexcept { input_dim = base_channels() * (1 + spatial_k); }
  data::TargetSpec target_spec() const;
  /// Throws ConfigError on any inconsistent field.
  void validate() const;
  bool operator==(const DeepAutoConfig&) const = default;
};

/// Defaults for a task: load uses horizons {1,15,60} at 60 s steps with
/// daily/weekly periods; rsrq predicts the next 5-minute histogram.
DeepAutoConfig default_config(data::Task task);

nlohmann::json to_json(const DeepAutoConfig& c);
/// Missing fields keep the task defaults; unknown fields are rejected.
DeepAutoConfig config_from_json(const nlohmann::json& j);
DeepAutoConfig load_config_file(const std::string& path);

}  // namespace deepauto::model
