// SPDX-License-Identifier: Apache-2.0
#include "deepauto/data/records.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "deepauto/error.hpp"

namespace deepauto::data {

std::string_view to_string(Topic t) noexcept {
  switch (t) {
    case Topic::load: return "load";
    case Topic::ue: return "ue";
    case Topic::rsrq: return "rsrq";
    case Topic::band: return "band";
    case Topic::power: return "power";
    case Topic::bandwidth: return "bandwidth";
  }
  return "load";
}

std::optional<Topic> topic_from_string(std::string_view name) noexcept {
  if (name == "load") return Topic::load;
  if (name == "ue") return Topic::ue;
  if (name == "rsrq") return Topic::rsrq;
  if (name == "band") return Topic::band;
  if (name == "power") return Topic::power;
  if (name == "bandwidth") return Topic::bandwidth;
  return std::nullopt;
}

CellRecord parse_record(std::string_view line) {
  nlohmann::json j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("record is not a JSON object");
  auto topic_it = j.find("topic");
  auto cell_it = j.find("cell");
  auto ts_it = j.find("ts");
  auto value_it = j.find("value");
  if (topic_it == j.end() || !topic_it->is_string()) throw DataError("record: missing string field 'topic'");
  if (cell_it == j.end() || !cell_it->is_string()) throw DataError("record: missing string field 'cell'");
  if (ts_it == j.end() || !ts_it->is_number_integer()) throw DataError("record: missing integer field 'ts'");
  if (value_it == j.end() || !value_it->is_number()) throw DataError("record: missing numeric field 'value'");
  auto topic = topic_from_string(topic_it->get_ref<const std::string&>());
  if (!topic) throw DataError("record: unknown topic '" + topic_it->get<std::string>() + "'");
  CellRecord r;
  r.topic = *topic;
  r.cell = cell_it->get<std::string>();
  r.ts = ts_it->get<std::int64_t>();
  r.value = value_it->get<double>();
  if (r.cell.empty()) throw DataError("record: empty cell id");
  return r;
}

std::optional<std::string> validate_record(const CellRecord& r) {
  if (!std::isfinite(r.value)) return "non-finite value";
  switch (r.topic) {
    case Topic::load:
      if (r.value < 0.0 || r.value > 1.0) return "load outside [0,1]";
      break;
    case Topic::ue:
      if (r.value < 0.0) return "negative ue count";
      break;
    case Topic::rsrq:
      if (r.value < 0.0 || r.value > kRsrqBins - 1 || r.value != std::floor(r.value)) return "rsrq not an integer in [0,34]";
      break;
    default:
      break;
  }
  return std::nullopt;
}

std::string format_record(const CellRecord& r) {
  nlohmann::ordered_json j;
  j["topic"] = to_string(r.topic);
  j["cell"] = r.cell;
  j["ts"] = r.ts;
  if (r.topic == Topic::rsrq) {
    j["value"] = static_cast<std::int64_t>(r.value);
  } else {
    j["value"] = r.value;
  }
  return j.dump();
}

std::vector<CellRecord> read_records(std::istream& in, ReadStats* stats) {
  std::vector<CellRecord> out;
  ReadStats local;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++local.lines;
    CellRecord r;
    try {
      r = parse_record(line);
    } catch (const DataError&) {
      ++local.malformed;
      continue;
    }
    if (validate_record(r)) {
      ++local.out_of_range;
      continue;
    }
    ++local.accepted;
    out.push_back(std::move(r));
  }
  if (stats) *stats = local;
  return out;
}

std::vector<CellRecord> read_records_file(const std::string& path, ReadStats* stats) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_records(in, stats);
}

void write_records(std::ostream& out, const std::vector<CellRecord>& records) {
  for (const auto& r : records) out << format_record(r) << '\n';
}

}  // namespace deepauto::data
