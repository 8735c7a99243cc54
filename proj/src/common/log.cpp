// SPDX-License-Identifier: Apache-2.0
#include "deepauto/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace deepauto::log {
namespace {

Level parse_level(const char* s) {
  if (s == nullptr) return Level::warn;
  const std::string v(s);
  if (v == "debug") return Level::debug;
  if (v == "info") return Level::info;
  if (v == "warn") return Level::warn;
  if (v == "error") return Level::error;
  if (v == "off") return Level::off;
  return Level::warn;
}

std::atomic<int>& level_slot() {
  static std::atomic<int> slot{static_cast<int>(parse_level(std::getenv("DEEPAUTO_LOG")))};
  return slot;
}

const char* level_name(Level l) {
  switch (l) {
    case Level::debug: return "debug";
    case Level::info: return "info";
    case Level::warn: return "warn";
    case Level::error: return "error";
    default: return "off";
  }
}

}  // namespace

Level threshold() { return static_cast<Level>(level_slot().load(std::memory_order_relaxed)); }

void set_threshold(Level level) { level_slot().store(static_cast<int>(level), std::memory_order_relaxed); }

void emit(Level level, std::string_view event, const nlohmann::json& fields) {
  if (level < threshold() || level == Level::off) return;
  nlohmann::json line = {{"level", level_name(level)}, {"event", event}};
  if (fields.is_object()) {
    for (auto it = fields.begin(); it != fields.end(); ++it) line[it.key()] = it.value();
  }
  static std::mutex mu;
  const std::string text = line.dump();
  std::lock_guard lock(mu);
  std::cerr << text << '\n';
}

}  // namespace deepauto::log
