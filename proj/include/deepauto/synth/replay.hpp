// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>

#include "deepauto/data/records.hpp"

namespace deepauto::synth {

struct ReplayStats {
  std::size_t emitted = 0;
  double seconds = 0.0;
};

/// Emits each record once (ts - first.ts) / speedup seconds have passed
/// since the start. An infinite speedup emits flat out. Throws DataError
/// before emitting anything if timestamps decrease, ConfigError for a
/// non-positive speedup.
ReplayStats replay(std::span<const data::CellRecord> records, double speedup,
                   const std::function<void(const data::CellRecord&)>& sink);

/// Line-level replay of an NDJSON file. Lines that do not parse are passed
/// through unchanged at the pace of the preceding record, so fault-injected
/// files can be replayed verbatim.
ReplayStats replay_lines(std::span<const std::string> lines, double speedup,
                         const std::function<void(std::string_view)>& sink);

}  // namespace deepauto::synth
