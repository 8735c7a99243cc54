// SPDX-License-Identifier: Apache-2.0
#include "deepauto/data/series.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <map>

#include "deepauto/error.hpp"

namespace deepauto::data {

std::string_view to_string(Task t) noexcept { return t == Task::load ? "load" : "rsrq"; }

Task task_from_string(std::string_view name) {
  if (name == "load") return Task::load;
  if (name == "rsrq") return Task::rsrq;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::vector<std::string> task_channels(Task t) {
  if (t == Task::load) return {"load", "ue"};
  std::vector<std::string> out;
  for (int b = 0; b < kRsrqBins; ++b) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "rsrq_%02d", b);
    out.emplace_back(buf);
  }
  return out;
}

bool KpiSeries::fully_present() const noexcept {
  return std::none_of(missing.begin(), missing.end(), [](std::uint8_t m) { return m != 0; });
}

std::size_t KpiSeries::channel_index(std::string_view name) const {
  for (std::size_t c = 0; c < channels.size(); ++c)
    if (channels[c] == name) return c;
  throw DataError("series " + cell_id + " has no channel '" + std::string(name) + "'");
}

std::vector<double> KpiSeries::channel(std::size_t c) const {
  std::vector<double> out(length());
  for (std::size_t t = 0; t < length(); ++t) out[t] = values(t, c);
  return out;
}

KpiSeries make_empty_series(std::string cell_id, std::int64_t start_ts, std::int64_t step_seconds,
                            std::vector<std::string> channels, std::size_t length) {
  KpiSeries s;
  s.cell_id = std::move(cell_id);
  s.start_ts = start_ts;
  s.step_seconds = step_seconds;
  const std::size_t c = channels.size();
  s.channels = std::move(channels);
  s.values.resize(length, c);
  s.missing.assign(length * c, 1);
  s.cell_config.resize(length, kConfigColumns);
  return s;
}

BucketAccumulator::BucketAccumulator(Task task) : task_(task) {
  const std::size_t c = task == Task::load ? 2 : kRsrqBins;
  sums_.assign(c, 0.0);
  counts_.assign(c, 0);
  config_.assign(kConfigColumns, 0.0);
}

void BucketAccumulator::add(const CellRecord& r) {
  switch (r.topic) {
    case Topic::load:
    case Topic::ue:
      if (task_ != Task::load) return;
      sums_[r.topic == Topic::load ? 0 : 1] += r.value;
      ++counts_[r.topic == Topic::load ? 0 : 1];
      return;
    case Topic::rsrq:
      if (task_ != Task::rsrq) return;
      sums_[static_cast<std::size_t>(r.value)] += 1.0;
      ++rsrq_reports_;
      return;
    case Topic::band: config_[0] = r.value; return;
    case Topic::power: config_[1] = r.value; return;
    case Topic::bandwidth: config_[2] = r.value; return;
  }
}

void BucketAccumulator::flush_into(KpiSeries& series, std::size_t t) {
  const std::size_t C = sums_.size();
  if (series.channel_count() != C) throw ShapeError("bucket flush: series channel count mismatch");
  for (std::size_t c = 0; c < C; ++c) {
    bool present;
    double v = 0.0;
    if (task_ == Task::load) {
      present = counts_[c] > 0;
      if (present) v = sums_[c] / static_cast<double>(counts_[c]);
    } else {
      present = rsrq_reports_ > 0;
      if (present) v = sums_[c] / static_cast<double>(rsrq_reports_);
    }
    series.values(t, c) = v;
    series.missing[t * C + c] = present ? 0 : 1;
  }
  for (std::size_t k = 0; k < kConfigColumns; ++k) series.cell_config(t, k) = config_[k];
  std::fill(sums_.begin(), sums_.end(), 0.0);
  std::fill(counts_.begin(), counts_.end(), 0);
  rsrq_reports_ = 0;
}

namespace {

bool is_measurement(Topic t, Task task) {
  return task == Task::load ? (t == Topic::load || t == Topic::ue) : t == Topic::rsrq;
}

}  // namespace

std::vector<KpiSeries> build_series(const std::vector<CellRecord>& records, Task task, std::int64_t step_seconds) {
  if (step_seconds <= 0) throw ConfigError("step_seconds must be positive");
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  std::map<std::string, std::vector<const CellRecord*>> by_cell;
  for (const auto& r : records) {
    if (validate_record(r)) continue;
    if (is_measurement(r.topic, task)) {
      const std::int64_t b = bucket_of(r.ts, step_seconds);
      lo = std::min(lo, b);
      hi = std::max(hi, b);
      by_cell[r.cell].push_back(&r);
    } else if (r.topic == Topic::band || r.topic == Topic::power || r.topic == Topic::bandwidth) {
      by_cell[r.cell].push_back(&r);
    }
  }
  std::vector<KpiSeries> out;
  if (lo > hi) return out;
  const std::size_t T = static_cast<std::size_t>(hi - lo + 1);
  for (auto& [cell, recs] : by_cell) {
    // configuration-only cells carry no measurements
    if (std::none_of(recs.begin(), recs.end(), [&](const CellRecord* r) { return is_measurement(r->topic, task); }))
      continue;
    std::stable_sort(recs.begin(), recs.end(), [&](const CellRecord* a, const CellRecord* b) {
      return bucket_of(a->ts, step_seconds) < bucket_of(b->ts, step_seconds);
    });
    KpiSeries s = make_empty_series(cell, lo * step_seconds, step_seconds, task_channels(task), T);
    BucketAccumulator acc(task);
    std::size_t next = 0;
    for (std::size_t t = 0; t < T; ++t) {
      const std::int64_t b = lo + static_cast<std::int64_t>(t);
      while (next < recs.size() && bucket_of(recs[next]->ts, step_seconds) <= b) acc.add(*recs[next++]);
      acc.flush_into(s, t);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void interpolate_channel(std::span<double> values, std::span<const std::uint8_t> missing) {
  const std::size_t T = values.size();
  std::size_t prev = T;  // index of last present value, T = none yet
  for (std::size_t t = 0; t < T; ++t) {
    if (missing[t]) continue;
    if (prev == T) {
      for (std::size_t k = 0; k < t; ++k) values[k] = values[t];
    } else if (t > prev + 1) {
      for (std::size_t k = prev + 1; k < t; ++k) values[k] = gap_fill(values[prev], values[t], k - prev, t - prev);
    }
    prev = t;
  }
  if (prev == T) throw DataError("channel has no present value");
  for (std::size_t k = prev + 1; k < T; ++k) values[k] = values[prev];
}

KpiSeries interpolate_missing(const KpiSeries& series) {
  KpiSeries out = series;
  const std::size_t T = series.length();
  const std::size_t C = series.channel_count();
  if (T == 0) return out;
  std::vector<double> col(T);
  std::vector<std::uint8_t> miss(T);
  for (std::size_t c = 0; c < C; ++c) {
    bool any_missing = false;
    for (std::size_t t = 0; t < T; ++t) {
      col[t] = series.values(t, c);
      miss[t] = series.missing[t * C + c];
      any_missing = any_missing || miss[t];
    }
    if (!any_missing) continue;
    try {
      interpolate_channel(col, miss);
    } catch (const DataError&) {
      throw DataError("cell " + series.cell_id + ": channel " + series.channels[c] + " has no present value");
    }
    for (std::size_t t = 0; t < T; ++t) out.values(t, c) = col[t];
  }
  std::fill(out.missing.begin(), out.missing.end(), 0);
  return out;
}

}  // namespace deepauto::data
