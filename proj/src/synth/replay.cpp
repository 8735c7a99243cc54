// SPDX-License-Identifier: Apache-2.0
#include "deepauto/synth/replay.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "deepauto/error.hpp"

namespace deepauto::synth {
namespace {

using Clock = std::chrono::steady_clock;

void check_speedup(double speedup) {
  if (!(speedup > 0.0)) throw ConfigError("replay speedup must be positive");
}

/// Sleeps until `offset_seconds` / speedup after `start`.
void pace(Clock::time_point start, double offset_seconds, double speedup) {
  if (std::isinf(speedup)) return;
  const auto due = start + std::chrono::duration_cast<Clock::duration>(
                               std::chrono::duration<double>(offset_seconds / speedup));
  std::this_thread::sleep_until(due);
}

double elapsed(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

}  // namespace

ReplayStats replay(std::span<const data::CellRecord> records, double speedup,
                   const std::function<void(const data::CellRecord&)>& sink) {
  check_speedup(speedup);
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].ts < records[i - 1].ts)
      throw DataError("replay: record " + std::to_string(i) + " is older than its predecessor");
  ReplayStats stats;
  const auto start = Clock::now();
  for (const auto& r : records) {
    pace(start, static_cast<double>(r.ts - records.front().ts), speedup);
    sink(r);
    ++stats.emitted;
  }
  stats.seconds = elapsed(start);
  return stats;
}

ReplayStats replay_lines(std::span<const std::string> lines, double speedup,
                         const std::function<void(std::string_view)>& sink) {
  check_speedup(speedup);
  std::vector<std::optional<std::int64_t>> ts(lines.size());
  std::optional<std::int64_t> first, last;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      ts[i] = data::parse_record(lines[i]).ts;
    } catch (const DataError&) {
      continue;
    }
    if (last && *ts[i] < *last)
      throw DataError("replay: line " + std::to_string(i + 1) + " is older than its predecessor");
    if (!first) first = ts[i];
    last = ts[i];
  }
  ReplayStats stats;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (ts[i]) pace(start, static_cast<double>(*ts[i] - *first), speedup);
    sink(lines[i]);
    ++stats.emitted;
  }
  stats.seconds = elapsed(start);
  return stats;
}

}  // namespace deepauto::synth
