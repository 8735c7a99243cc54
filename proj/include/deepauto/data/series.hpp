// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deepauto/data/records.hpp"
#include "deepauto/nn/tensor.hpp"

namespace deepauto::data {

/// Which KPI the series carries: cell load (+ UE count) or per-bucket
/// RSRQ distributions.
enum class Task { load, rsrq };

std::string_view to_string(Task t) noexcept;
Task task_from_string(std::string_view name);

/// Channel names for a task: {"load","ue"} or {"rsrq_00".."rsrq_34"}.
std::vector<std::string> task_channels(Task t);

/// Number of configuration columns (band, power, bandwidth).
inline constexpr std::size_t kConfigColumns = 3;

/// Regular-interval multivariate series for one cell.
struct KpiSeries {
  std::string cell_id;
  std::int64_t start_ts = 0;
  std::int64_t step_seconds = 60;
  std::vector<std::string> channels;
  nn::Tensor2 values;                  // T x C
  std::vector<std::uint8_t> missing;   // T x C, 1 where no observation
  nn::Tensor2 cell_config;             // T x 3, configuration in force at the end of each step (raw units)

  std::size_t length() const noexcept { return values.rows(); }
  std::size_t channel_count() const noexcept { return values.cols(); }
  bool is_missing(std::size_t t, std::size_t c) const { return missing[t * channel_count() + c] != 0; }
  std::int64_t timestamp(std::size_t t) const noexcept {
    return start_ts + static_cast<std::int64_t>(t) * step_seconds;
  }
  bool fully_present() const noexcept;
  std::size_t channel_index(std::string_view name) const;
  /// Column `c` as a contiguous vector.
  std::vector<double> channel(std::size_t c) const;
};

/// Empty series of length T with every value missing and zero configuration.
KpiSeries make_empty_series(std::string cell_id, std::int64_t start_ts, std::int64_t step_seconds,
                            std::vector<std::string> channels, std::size_t length);

/// Accumulates records into per-bucket sums for one cell. Duplicate
/// records in a bucket are averaged; configuration topics are carried
/// forward. This is the single bucketing rule shared by batch preparation
/// and the streaming engine.
class BucketAccumulator {
 public:
  explicit BucketAccumulator(Task task);

  /// Adds a record to the open bucket. Topics irrelevant to the task are ignored.
  void add(const CellRecord& r);
  /// Writes the averaged bucket into row `t` of `series` (marking missing
  /// channels) and resets the sums. Configuration carries over.
  void flush_into(KpiSeries& series, std::size_t t);
  /// Configuration currently in force (raw units).
  std::span<const double> config() const noexcept { return config_; }

 private:
  Task task_;
  std::vector<double> sums_;
  std::vector<std::uint32_t> counts_;
  std::uint32_t rsrq_reports_ = 0;
  std::vector<double> config_;
};

/// Linear fill value `offset` steps after a present value `a` on the way
/// to `b`, `span` steps later. Shared by every gap-filling path.
inline double gap_fill(double a, double b, std::size_t offset, std::size_t span) noexcept {
  return a + (b - a) * static_cast<double>(offset) / static_cast<double>(span);
}

/// Builds time-aligned series for every cell found in `records`. All cells
/// share the bucket range [min, max] over the task's measurement topics.
/// Cells are returned in lexicographic id order.
std::vector<KpiSeries> build_series(const std::vector<CellRecord>& records, Task task, std::int64_t step_seconds);

/// Fills interior gaps linearly between the nearest present neighbours and
/// extends the first/last present value over leading/trailing gaps.
/// Throws DataError naming the cell and channel if a channel has no value.
KpiSeries interpolate_missing(const KpiSeries& series);

/// Same rule applied to a single channel; `missing` marks absent entries.
void interpolate_channel(std::span<double> values, std::span<const std::uint8_t> missing);

}  // namespace deepauto::data
