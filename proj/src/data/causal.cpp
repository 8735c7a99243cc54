// SPDX-License-Identifier: Apache-2.0
#include "deepauto/data/causal.hpp"

#include "deepauto/error.hpp"

namespace deepauto::data {

CausalBuffer::CausalBuffer(std::size_t channels, std::size_t capacity)
    : channels_(channels), capacity_(capacity), last_(channels) {
  if (capacity == 0) throw ConfigError("CausalBuffer capacity must be positive");
}

void CausalBuffer::set_capacity(std::size_t capacity) {
  if (capacity == 0) throw ConfigError("CausalBuffer capacity must be positive");
  capacity_ = capacity;
  while (rows_.size() > capacity_) rows_.pop_front();
}

std::int64_t CausalBuffer::next_ts(std::int64_t step_seconds) const noexcept {
  return rows_.empty() ? 0 : rows_.back().ts + step_seconds;
}

void CausalBuffer::push(std::int64_t ts, std::span<const double> values, std::span<const std::uint8_t> missing,
                        std::span<const double> config) {
  if (values.size() != channels_ || missing.size() != channels_ || config.size() != kConfigColumns)
    throw ShapeError("CausalBuffer::push: row shape mismatch");
  if (rows_.size() == capacity_) rows_.pop_front();
  rows_.push_back({ts, std::vector<double>(values.begin(), values.end()), {config.begin(), config.end()}});
  const std::uint64_t t = pushed_++;
  Row& row = rows_.back();
  for (std::size_t c = 0; c < channels_; ++c) {
    LastSeen& last = last_[c];
    if (missing[c]) {
      row.values[c] = last.any ? last.value : 0.0;
      continue;
    }
    if (!last.any) {
      for (std::uint64_t k = pushed_ - rows_.size(); k < t; ++k) at_abs(k).values[c] = values[c];
    } else if (t > last.index + 1) {
      for (std::uint64_t k = last.index + 1; k < t; ++k)
        if (retained(k))
          at_abs(k).values[c] = gap_fill(last.value, values[c], static_cast<std::size_t>(k - last.index),
                                         static_cast<std::size_t>(t - last.index));
    }
    last = {true, t, values[c]};
  }
}

void CausalBuffer::push_row(const KpiSeries& series, std::size_t t) {
  const std::size_t C = series.channel_count();
  push(series.timestamp(t), series.values.row(t),
       std::span<const std::uint8_t>(series.missing.data() + t * C, C), series.cell_config.row(t));
}

bool CausalBuffer::ready(std::size_t n) const noexcept {
  if (rows_.size() < n) return false;
  for (const auto& l : last_)
    if (!l.any) return false;
  return true;
}

KpiSeries CausalBuffer::tail(std::size_t n, const std::string& cell_id, std::int64_t step_seconds,
                             const std::vector<std::string>& channel_names) const {
  if (!ready(n)) throw DataError("CausalBuffer::tail: not enough filled history");
  const std::size_t first = rows_.size() - n;
  KpiSeries s = make_empty_series(cell_id, rows_[first].ts, step_seconds, channel_names, n);
  for (std::size_t r = 0; r < n; ++r) {
    const Row& row = rows_[first + r];
    std::copy(row.values.begin(), row.values.end(), s.values.row(r).begin());
    std::copy(row.config.begin(), row.config.end(), s.cell_config.row(r).begin());
  }
  std::fill(s.missing.begin(), s.missing.end(), 0);
  return s;
}

}  // namespace deepauto::data
