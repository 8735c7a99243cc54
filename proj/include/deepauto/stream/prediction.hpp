// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepauto/data/causal.hpp"
#include "deepauto/data/records.hpp"
#include "deepauto/model/io.hpp"

namespace deepauto::stream {

/// A loaded model plus what the serving path derives from it.
struct ModelSnapshot {
  model::ModelBundle bundle;
  std::uint64_t version = 0;
  std::vector<std::string> channel_names;
  data::TargetSpec target;
  std::size_t lookback = 0;

  /// Throws ConfigError for models the serving path cannot run (spatial
  /// augmentation needs neighbour buffers that are not kept online).
  static std::shared_ptr<const ModelSnapshot> make(model::ModelBundle bundle, std::uint64_t version);
};

struct PredictionRecord {
  std::string cell;
  std::int64_t anchor_ts = 0;  // start of the first predicted bucket
  std::vector<std::size_t> horizons;  // empty for histogram output
  std::vector<double> values;         // one per horizon, or the histogram
  std::uint64_t model_version = 0;
  double latency_ms = 0.0;

  /// {"cell","anchor_ts","h1",...,"model_version","latency_ms"} or with
  /// "pdf":[...] for histograms.
  nlohmann::json to_json() const;
  static PredictionRecord from_json(const nlohmann::json& j);
};

/// Prediction for the bucket after the newest row of `buffer`, or nothing
/// while the buffer is still warming up. This is the one inference routine
/// behind both batch and streaming prediction.
std::optional<PredictionRecord> predict_next(const data::CausalBuffer& buffer, const ModelSnapshot& model,
                                             const std::string& cell);

/// Batch counterpart of the streaming engine: buckets `records` with the
/// dataprep rules and replays every cell's rows through a CausalBuffer.
/// Output is ordered by (cell, anchor_ts); latency is 0.
std::vector<PredictionRecord> batch_predict(const std::vector<data::CellRecord>& records,
                                            const model::ModelBundle& bundle);

}  // namespace deepauto::stream
