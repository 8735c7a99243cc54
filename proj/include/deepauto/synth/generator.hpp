// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "deepauto/data/records.hpp"

namespace deepauto::synth {

struct RsrqConfig {
  std::size_t reports_per_5min = 0;  // 0 disables the rsrq topic
  double drift_amp = 4.0;            // daily swing of the mode, in bins
  double walk_sigma = 0.25;          // random-walk step of the mode per 5 minutes, in bins
  double walk_limit = 5.0;           // the walk is reflected at +-walk_limit bins
  double width_min = 1.5, width_max = 3.5;  // spread of the per-cell distribution, in bins

  bool operator==(const RsrqConfig&) const = default;
};

/// Parameters of the synthetic network. Load follows
///   clip01(base + daily_amp * (1 - weekend_damping * weekend) * sin(2 pi t / day + phase)
///          + weekly_amp * weekday_profile + texture(t mod day) + shock + ar + noise)
/// where base, phase and texture are shared by the cells of a cluster.
struct SynthConfig {
  std::size_t n_cells = 50;
  std::size_t days = 28;
  std::int64_t step_seconds = 900;
  std::int64_t start_ts = 1704067200;  // Monday 2024-01-01 00:00 UTC

  double daily_amp = 0.2;
  double weekly_amp = 0.02;
  double weekend_damping = 0.05;
  double texture_amp = 0.25;  // height of two short per-cluster bursts a day
  double noise_sigma = 0.01;
  double ar_rho = 0.95;       // per-cell slow deviation
  double ar_sigma = 0.003;
  double missing_rate = 0.02;
  std::size_t n_clusters = 4;
  double event_rate = 0.03;   // configuration shocks per cell-day
  double shock_size = 0.08;
  double ue_per_load = 300.0;
  double ue_noise = 4.0;
  bool emit_load = true;  // load and ue topics
  bool emit_config = true;
  RsrqConfig rsrq;
  std::uint64_t seed = 7;

  /// Throws ConfigError for probabilities outside [0,1], negative
  /// amplitudes, or amplitudes that cannot fit inside [0, 1] together.
  void validate() const;
  bool operator==(const SynthConfig&) const = default;
};

/// 50 cells, 28 days at 15-minute steps.
SynthConfig default_load_config();
/// Load-free preset for histogram prediction: RSRQ reports at 5-minute
/// granularity.
SynthConfig default_rsrq_config();

nlohmann::json to_json(const SynthConfig& c);
/// Fields not present keep their defaults; unknown fields are rejected.
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Cell ids "cell_000" ... in index order.
std::string cell_name(std::size_t index);

/// Cluster of each cell (round-robin).
std::size_t cluster_of(const SynthConfig& c, std::size_t cell) noexcept;

/// Generates the records ordered by (ts, cell, topic). Identical for equal
/// configurations.
std::vector<data::CellRecord> generate(const SynthConfig& config);

}  // namespace deepauto::synth
