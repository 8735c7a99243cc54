// SPDX-License-Identifier: Apache-2.0
#include "deepauto/model/dataset.hpp"

#include <algorithm>

#include "deepauto/error.hpp"
#include "deepauto/log.hpp"
#include "deepauto/spatial/graph.hpp"

namespace deepauto::model {

CellSeriesSet assemble_series(const std::vector<data::CellRecord>& records, data::Task task,
                              std::int64_t step_seconds) {
  CellSeriesSet out;
  out.task = task;
  for (auto& s : data::build_series(records, task, step_seconds)) {
    try {
      out.series.push_back(data::interpolate_missing(s));
    } catch (const DataError& e) {
      log::warn("cell_skipped", {{"cell", s.cell_id}, {"reason", e.what()}});
      out.skipped.push_back(s.cell_id);
    }
  }
  if (out.series.empty()) throw DataError("no usable cell series in the input");
  return out;
}

std::vector<std::optional<std::pair<double, double>>> fixed_ranges(data::Task task) {
  const auto channels = data::task_channels(task);
  std::vector<std::optional<std::pair<double, double>>> fixed(channels.size());
  if (task == data::Task::load) {
    fixed[0] = std::pair{0.0, 1.0};
  } else {
    for (auto& f : fixed) f = std::pair{0.0, 1.0};
  }
  return fixed;
}

PreparedDataset prepare_dataset(const CellSeriesSet& cells, const DeepAutoConfig& config,
                                const PrepareOptions& options) {
  config.validate();
  if (cells.task != config.task) throw ConfigError("series task differs from the model task");
  if (cells.series.empty()) throw DataError("prepare_dataset: no series");
  if (options.anchor_stride == 0) throw ConfigError("anchor_stride must be positive");
  const std::size_t T = cells.series.front().length();
  for (const auto& s : cells.series)
    if (s.length() != T || s.step_seconds != config.step_seconds)
      throw ShapeError("prepare_dataset: series are not aligned on the configured step");

  PreparedDataset out;
  out.config = config;
  const auto target = config.target_spec();
  data::WindowOptions wopt;
  wopt.min_anchor = std::max(options.min_anchor, config.window.lookback());
  const auto range = data::valid_anchors(T, config.window, target, wopt);
  if (!range) {
    throw DataError("series of " + std::to_string(T) + " steps are too short for lookback " +
                    std::to_string(wopt.min_anchor) + " and target reach " + std::to_string(target.reach()));
  }
  for (std::size_t a = range->first; a <= range->last; a += options.anchor_stride) out.anchors.push_back(a);

  const std::size_t n_cells = cells.series.size();
  out.bounds = data::split_4_1_1(out.anchors.size() * n_cells);
  out.fit_rows = out.anchors[out.bounds.train_end / n_cells];

  if (options.scaler) {
    if (options.scaler->channels() != config.base_channels()) throw ConfigError("scaler does not match the task's channels");
    out.scaler = *options.scaler;
  } else {
    out.scaler = data::fit_scaler(cells.series, out.fit_rows, fixed_ranges(config.task));
  }
  std::vector<data::KpiSeries> scaled = cells.series;
  for (auto& s : scaled) data::apply_scaler(out.scaler, s);

  if (config.spatial_k > 0) {
    if (n_cells < 2) throw DataError("spatial augmentation needs at least two cells");
    const auto graph = spatial::build_graph(scaled, 0, 0, out.fit_rows);
    for (const auto& s : scaled) {
      const auto ids = spatial::topk_neighbors(graph, s.cell_id, config.spatial_k);
      if (ids.size() < config.spatial_k)
        throw DataError("too few cells for spatial_k = " + std::to_string(config.spatial_k));
      std::vector<const data::KpiSeries*> nb;
      for (const auto& id : ids) nb.push_back(&scaled[graph.index_of(id)]);
      out.series.push_back(spatial::augment_inputs(s, nb));
      out.neighbors.push_back(ids);
    }
  } else {
    out.series = std::move(scaled);
  }

  std::vector<data::WindowedSample> samples;
  samples.reserve(out.anchors.size() * n_cells);
  for (std::size_t a : out.anchors)
    for (std::size_t c = 0; c < n_cells; ++c)
      samples.push_back(data::build_sample(out.series[c], a, config.window, target, true, c));
  out.splits = data::split_4_1_1(std::move(samples));
  log::info("dataset_prepared", {{"cells", n_cells},
                                 {"anchors", out.anchors.size()},
                                 {"train", out.splits.train.size()},
                                 {"val", out.splits.val.size()},
                                 {"test", out.splits.test.size()},
                                 {"fit_rows", out.fit_rows}});
  return out;
}

}  // namespace deepauto::model
