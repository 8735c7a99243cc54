// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include <json.hpp>

namespace deepauto::log {

enum class Level { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

/// Threshold read once from DEEPAUTO_LOG (debug|info|warn|error|off, default warn).
Level threshold();
void set_threshold(Level level);

/// Writes one JSON object per line to stderr: {"level":..,"event":..,<fields>}.
void emit(Level level, std::string_view event, const nlohmann::json& fields = nlohmann::json::object());

inline void debug(std::string_view e, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::debug, e, f); }
inline void info(std::string_view e, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::info, e, f); }
inline void warn(std::string_view e, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::warn, e, f); }
inline void error(std::string_view e, const nlohmann::json& f = nlohmann::json::object()) { emit(Level::error, e, f); }

}  // namespace deepauto::log
