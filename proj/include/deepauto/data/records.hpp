// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deepauto::data {

/// Measurement stream a record belongs to. The three configuration topics
/// carry the cell's band (MHz), transmit power (dBm) and bandwidth (MHz)
/// and are only emitted when the configuration changes.
enum class Topic { load, ue, rsrq, band, power, bandwidth };

inline constexpr int kRsrqBins = 35;

std::string_view to_string(Topic t) noexcept;
std::optional<Topic> topic_from_string(std::string_view name) noexcept;

/// One timestamped measurement for one cell on one topic.
struct CellRecord {
  Topic topic = Topic::load;
  std::string cell;
  std::int64_t ts = 0;  // UTC epoch seconds
  double value = 0.0;

  bool operator==(const CellRecord&) const = default;
};

/// Parses one NDJSON line {"topic":..,"cell":..,"ts":..,"value":..}.
/// Throws DataError on malformed JSON, missing fields or an unknown topic.
CellRecord parse_record(std::string_view line);

/// Checks value ranges: load in [0,1], ue >= 0, rsrq integer in [0,34],
/// configuration values finite. Returns an explanation when invalid.
std::optional<std::string> validate_record(const CellRecord& r);

/// Serialises a record as a single NDJSON line (no trailing newline).
std::string format_record(const CellRecord& r);

struct ReadStats {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t out_of_range = 0;
};

/// Reads an NDJSON stream, skipping (and counting) malformed or
/// out-of-range lines. Blank lines are ignored.
std::vector<CellRecord> read_records(std::istream& in, ReadStats* stats = nullptr);
std::vector<CellRecord> read_records_file(const std::string& path, ReadStats* stats = nullptr);

void write_records(std::ostream& out, const std::vector<CellRecord>& records);

/// floor(ts / step) for possibly negative timestamps.
inline std::int64_t bucket_of(std::int64_t ts, std::int64_t step) noexcept {
  const std::int64_t q = ts / step;
  return (ts % step != 0 && ts < 0) ? q - 1 : q;
}

}  // namespace deepauto::data
