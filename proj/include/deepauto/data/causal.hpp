// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "deepauto/data/series.hpp"

namespace deepauto::data {

/// Bounded history of bucket rows with gap filling that only looks back.
/// After row t has been pushed the retained rows equal interpolate_missing
/// applied to rows [0, t]: interior gaps are linear between present
/// neighbours, a trailing gap repeats the last present value until the
/// next present value arrives, a leading gap takes the first present value.
class CausalBuffer {
 public:
  CausalBuffer(std::size_t channels, std::size_t capacity);

  /// Appends the row for the bucket starting at `ts`. Rows must be pushed
  /// for consecutive buckets.
  void push(std::int64_t ts, std::span<const double> values, std::span<const std::uint8_t> missing,
            std::span<const double> config);
  /// Appends row `t` of `series`.
  void push_row(const KpiSeries& series, std::size_t t);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t capacity() const noexcept { return capacity_; }
  /// Grows or shrinks the retained history (oldest rows drop first).
  void set_capacity(std::size_t capacity);
  std::size_t size() const noexcept { return rows_.size(); }
  /// Rows pushed so far, including evicted ones.
  std::uint64_t pushed() const noexcept { return pushed_; }
  /// Timestamp of the bucket after the newest row.
  std::int64_t next_ts(std::int64_t step_seconds) const noexcept;

  /// True when the newest `n` rows exist and every channel has been
  /// observed at least once.
  bool ready(std::size_t n) const noexcept;

  /// The newest `n` rows as a gap-free series (raw units).
  KpiSeries tail(std::size_t n, const std::string& cell_id, std::int64_t step_seconds,
                 const std::vector<std::string>& channel_names) const;

 private:
  struct Row {
    std::int64_t ts;
    std::vector<double> values;
    std::vector<double> config;
  };
  struct LastSeen {
    bool any = false;
    std::uint64_t index = 0;  // absolute row index
    double value = 0.0;
  };

  Row& at_abs(std::uint64_t index) { return rows_[index - (pushed_ - rows_.size())]; }
  bool retained(std::uint64_t index) const noexcept { return index + rows_.size() >= pushed_ && index < pushed_; }

  std::size_t channels_;
  std::size_t capacity_;
  std::deque<Row> rows_;
  std::vector<LastSeen> last_;
  std::uint64_t pushed_ = 0;
};

}  // namespace deepauto::data
