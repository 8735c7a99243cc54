// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deepauto/data/records.hpp"
#include "deepauto/data/scaler.hpp"
#include "deepauto/data/series.hpp"
#include "deepauto/data/split.hpp"
#include "deepauto/data/windows.hpp"
#include "deepauto/model/config.hpp"

namespace deepauto::model {

/// Aligned, gap-filled series for every usable cell (unscaled).
struct CellSeriesSet {
  data::Task task = data::Task::load;
  std::vector<data::KpiSeries> series;
  std::vector<std::string> skipped;  // cells dropped because a channel had no observation
};

/// build_series + interpolate_missing. Cells whose channels are entirely
/// missing are skipped with a warning.
CellSeriesSet assemble_series(const std::vector<data::CellRecord>& records, data::Task task,
                              std::int64_t step_seconds);

/// Ranges of channels that are already fractions and keep [0, 1] instead
/// of a fitted range (load, RSRQ bin probabilities).
std::vector<std::optional<std::pair<double, double>>> fixed_ranges(data::Task task);

struct PrepareOptions {
  /// Anchors below this are not used (0 means the window's own lookback).
  /// Candidates with different lookbacks pass a common value so their
  /// splits line up.
  std::size_t min_anchor = 0;
  /// Keep every n-th anchor.
  std::size_t anchor_stride = 1;
  /// Scaler from a trained model; when absent one is fitted on the
  /// training rows.
  std::optional<data::ScalerParams> scaler;
};

struct PreparedDataset {
  DeepAutoConfig config;
  std::vector<data::KpiSeries> series;  // scaled (and augmented) model inputs
  data::ScalerParams scaler;            // over the base channels
  std::vector<std::vector<std::string>> neighbors;  // per cell, empty without spatial augmentation
  std::size_t fit_rows = 0;  // rows [0, fit_rows) fitted the scaler and graph
  std::vector<std::size_t> anchors;
  data::SplitBounds bounds;
  data::Partition<data::WindowedSample> splits;
};

/// Scales, optionally augments and windows `cells` for `config`. Samples
/// are ordered by (anchor, cell) and split 4:1:1 chronologically; the
/// scaler and the spatial graph only see rows before the first
/// validation anchor.
PreparedDataset prepare_dataset(const CellSeriesSet& cells, const DeepAutoConfig& config,
                                const PrepareOptions& options = {});

}  // namespace deepauto::model
