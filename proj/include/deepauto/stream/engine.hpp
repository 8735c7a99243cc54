// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "deepauto/data/causal.hpp"
#include "deepauto/data/records.hpp"
#include "deepauto/data/series.hpp"
#include "deepauto/stream/prediction.hpp"

namespace deepauto::stream {

using Clock = std::chrono::steady_clock;

struct EngineOptions {
  std::size_t shards = 16;
  /// Cells without records for this long (event time) are forgotten.
  std::int64_t idle_ttl_seconds = 24 * 3600;
  /// Number of recent latency samples kept for the percentiles.
  std::size_t latency_samples = 1 << 16;
};

struct EngineStats {
  std::uint64_t ingested = 0;
  std::uint64_t malformed = 0;
  std::uint64_t out_of_range = 0;
  std::uint64_t late = 0;
  std::uint64_t predictions = 0;
  std::uint64_t evicted = 0;
  std::size_t cells = 0;
  std::size_t ready_cells = 0;
  std::optional<double> p50_ms;
  std::optional<double> p99_ms;
  std::uint64_t model_version = 0;
};

/// Online counterpart of batch prediction. Records are bucketed per cell;
/// a bucket closes when a record for a later bucket of the same cell
/// arrives, when the event-time watermark (newest timestamp seen minus two
/// steps) passes its end, or on flush(). Every closed bucket is pushed
/// through a CausalBuffer and, once the lookback is filled, produces one
/// prediction for the next bucket. Records for already closed buckets are
/// counted as late and dropped.
///
/// Thread-safe: cells are sharded behind mutexes and the model is an
/// immutable snapshot swapped atomically, so a prediction always uses a
/// single model version.
class Engine {
 public:
  using Subscriber = std::function<void(const PredictionRecord&)>;

  explicit Engine(EngineOptions options = {});

  /// Installs a model. The first model fixes the task and step; later
  /// models must agree on both (ConfigError otherwise, old model kept).
  void load_model(model::ModelBundle bundle);
  /// Loads from disk; on any failure the current model stays and the
  /// reason is returned.
  std::optional<std::string> reload_model_file(const std::string& path);
  std::shared_ptr<const ModelSnapshot> model() const;

  /// Parses and ingests one NDJSON line. Malformed or out-of-range lines
  /// are counted, never thrown. Requires a model.
  void ingest_line(std::string_view line, Clock::time_point received = Clock::now());
  void ingest(const data::CellRecord& record, Clock::time_point received = Clock::now());

  /// Closes every open bucket (end of stream or idle input).
  void flush();

  /// Called for every prediction, in bucket order per cell, with the
  /// cell's shard locked: a subscriber must not call back into the engine.
  /// Returns an id for unsubscribe().
  std::size_t subscribe(Subscriber s);
  void unsubscribe(std::size_t id);

  enum class CellState { unknown, warming, ready };
  CellState cell_state(std::string_view cell) const;
  std::optional<PredictionRecord> latest(std::string_view cell) const;

  EngineStats stats() const;
  nlohmann::json health() const;

 private:
  struct Cell {
    Cell(data::Task task, std::size_t channels, std::size_t capacity) : acc(task), buffer(channels, capacity) {}
    data::BucketAccumulator acc;
    data::CausalBuffer buffer;
    bool open = false;
    std::int64_t open_bucket = 0;
    bool any_closed = false;
    std::int64_t last_closed = 0;
    std::int64_t last_event_ts = 0;
    Clock::time_point open_received{};
    std::optional<PredictionRecord> latest;
  };
  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<std::string, Cell> cells;
  };

  Shard& shard_for(std::string_view cell) const;
  void close_bucket(const std::string& id, Cell& cell, Clock::time_point received,
                    const std::shared_ptr<const ModelSnapshot>& model);
  void advance_watermark(std::int64_t ts);
  void record_latency(double ms);
  void publish(const PredictionRecord& p);

  EngineOptions options_;
  mutable std::vector<Shard> shards_;

  mutable std::mutex model_mu_;
  std::shared_ptr<const ModelSnapshot> model_;
  std::uint64_t next_version_ = 1;

  std::mutex subscribers_mu_;
  std::vector<std::pair<std::size_t, Subscriber>> subscribers_;
  std::size_t next_subscriber_ = 1;

  std::atomic<std::int64_t> max_ts_{INT64_MIN};
  std::atomic<std::int64_t> watermark_bucket_{INT64_MIN};
  std::atomic<std::uint64_t> ingested_{0}, malformed_{0}, out_of_range_{0}, late_{0}, predictions_{0},
      evicted_{0};

  mutable std::mutex latency_mu_;
  std::vector<double> latencies_;
  std::size_t latency_next_ = 0;
};

std::string_view to_string(Engine::CellState s) noexcept;

}  // namespace deepauto::stream
