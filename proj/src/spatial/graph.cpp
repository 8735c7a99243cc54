// SPDX-License-Identifier: Apache-2.0
#include "deepauto/spatial/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deepauto/error.hpp"
#include "deepauto/log.hpp"

namespace deepauto::spatial {
namespace {

void check_inputs(std::span<const data::KpiSeries> cells, std::size_t channel, std::size_t row_begin,
                  std::size_t row_end) {
  if (cells.size() < 2) throw DataError("build_graph: need at least two cells");
  const std::size_t T = cells.front().length();
  for (const auto& c : cells) {
    if (c.length() != T) throw ShapeError("build_graph: series of " + c.cell_id + " is misaligned");
    if (channel >= c.channel_count()) throw ShapeError("build_graph: channel out of range");
  }
  if (row_begin >= row_end || row_end > T) throw DataError("build_graph: empty or out-of-range window");
}

SpatialGraph empty_graph(std::span<const data::KpiSeries> cells) {
  SpatialGraph g;
  for (const auto& c : cells) g.nodes.push_back(c.cell_id);
  if (!std::is_sorted(g.nodes.begin(), g.nodes.end()) ||
      std::adjacent_find(g.nodes.begin(), g.nodes.end()) != g.nodes.end())
    throw DataError("build_graph: cell ids must be unique and sorted");
  g.weights.resize(cells.size(), cells.size());
  return g;
}

std::vector<std::vector<double>> slices(std::span<const data::KpiSeries> cells, std::size_t channel,
                                        std::size_t row_begin, std::size_t row_end) {
  std::vector<std::vector<double>> out(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out[i].reserve(row_end - row_begin);
    for (std::size_t t = row_begin; t < row_end; ++t) out[i].push_back(cells[i].values(t, channel));
  }
  return out;
}

}  // namespace

std::size_t SpatialGraph::index_of(std::string_view cell) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), cell);
  if (it == nodes.end() || *it != cell) throw DataError("unknown cell " + std::string(cell));
  return static_cast<std::size_t>(it - nodes.begin());
}

double SpatialGraph::weight(std::string_view a, std::string_view b) const {
  return weights(index_of(a), index_of(b));
}

nlohmann::json SpatialGraph::to_json() const {
  nlohmann::json edges = nlohmann::json::array();
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j)
      if (weights(i, j) > 0.0) edges.push_back({{"a", nodes[i]}, {"b", nodes[j]}, {"w", weights(i, j)}});
  return {{"nodes", nodes}, {"edges", std::move(edges)}};
}

double abs_pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("abs_pearson: length mismatch");
  if (a.empty()) return 0.0;
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return std::min(1.0, std::abs(sab) / std::sqrt(saa * sbb));
}

SpatialGraph build_graph_serial(std::span<const data::KpiSeries> cells, std::size_t channel, std::size_t row_begin,
                                std::size_t row_end) {
  check_inputs(cells, channel, row_begin, row_end);
  SpatialGraph g = empty_graph(cells);
  const auto x = slices(cells, channel, row_begin, row_end);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double w = abs_pearson(x[i], x[j]);
      g.weights(i, j) = w;
      g.weights(j, i) = w;
    }
  }
  return g;
}

SpatialGraph build_graph(std::span<const data::KpiSeries> cells, std::size_t channel, std::size_t row_begin,
                         std::size_t row_end) {
  check_inputs(cells, channel, row_begin, row_end);
  SpatialGraph g = empty_graph(cells);
  const auto x = slices(cells, channel, row_begin, row_end);
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      const double w = abs_pearson(x[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(j)]);
      g.weights(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = w;
      g.weights(static_cast<std::size_t>(j), static_cast<std::size_t>(i)) = w;
    }
  }
  return g;
}

std::vector<std::string> topk_neighbors(const SpatialGraph& graph, std::string_view cell, std::size_t k,
                                        std::string* diagnostic) {
  const std::size_t self = graph.index_of(cell);
  if (k == 0) return {};
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < graph.size(); ++j)
    if (j != self) order.push_back(j);
  // nodes are sorted, so index order is id order
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return graph.weights(self, a) > graph.weights(self, b); });
  if (order.size() < k) {
    const std::string msg = "requested " + std::to_string(k) + " neighbours of " + std::string(cell) + ", only " +
                            std::to_string(order.size()) + " available";
    log::warn("topk_short", {{"cell", cell}, {"k", k}, {"available", order.size()}});
    if (diagnostic) *diagnostic = msg;
  } else {
    order.resize(k);
  }
  std::vector<std::string> out;
  for (std::size_t j : order) out.push_back(graph.nodes[j]);
  return out;
}

data::KpiSeries augment_inputs(const data::KpiSeries& series, std::span<const data::KpiSeries* const> neighbors) {
  if (neighbors.empty()) return series;
  const std::size_t T = series.length(), C = series.channel_count();
  std::vector<std::string> names = series.channels;
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const auto& nb = *neighbors[k];
    if (nb.length() != T || nb.start_ts != series.start_ts || nb.step_seconds != series.step_seconds)
      throw ShapeError("augment_inputs: neighbour " + nb.cell_id + " is misaligned with " + series.cell_id);
    if (nb.channel_count() != C) throw ShapeError("augment_inputs: neighbour channel count differs");
    for (const auto& name : nb.channels) names.push_back(std::to_string(k + 1) + ":" + name);
  }
  data::KpiSeries out = data::make_empty_series(series.cell_id, series.start_ts, series.step_seconds, names, T);
  out.cell_config = series.cell_config;
  const std::size_t W = names.size();
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) {
      out.values(t, c) = series.values(t, c);
      out.missing[t * W + c] = series.missing[t * C + c];
    }
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t dst = (k + 1) * C + c;
        out.values(t, dst) = neighbors[k]->values(t, c);
        out.missing[t * W + dst] = neighbors[k]->missing[t * C + c];
      }
    }
  }
  return out;
}

}  // namespace deepauto::spatial
