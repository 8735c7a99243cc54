// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include "deepauto/data/scaler.hpp"
#include "deepauto/model/config.hpp"
#include "deepauto/model/network.hpp"

namespace deepauto::model {

/// Everything needed to serve a trained model.
struct ModelBundle {
  DeepAutoConfig config;
  DeepAutoParams params;
  data::ScalerParams scaler;

  bool operator==(const ModelBundle&) const = default;
};

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Layout (all integers little-endian):
///   "DAUT" | u32 version | u64 n | n bytes canonical JSON config |
///   u32 tensor count | per tensor: u16 name length, name, u32 rows,
///   u32 cols, rows*cols f64 | u32 CRC-32 of everything before it.
/// The scaler is stored as tensors scaler.min, scaler.max, scaler.constant.
std::string save_model(const ModelBundle& bundle);

/// Inverse of save_model. Throws FormatError (bad_magic, bad_version,
/// truncated, checksum, bad_content). Parameter shapes come from the
/// stored config, whatever the caller expected.
ModelBundle load_model(std::string_view bytes);

/// Writes through a temporary file and rename.
void save_model_file(const std::string& path, const ModelBundle& bundle);
ModelBundle load_model_file(const std::string& path);

}  // namespace deepauto::model
