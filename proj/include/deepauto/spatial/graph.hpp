// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "deepauto/data/series.hpp"
#include "deepauto/nn/tensor.hpp"

namespace deepauto::spatial {

/// Correlation graph over cells. weights(i, j) = |Pearson r| of the chosen
/// channel over the fitting window; the diagonal is zero.
struct SpatialGraph {
  std::vector<std::string> nodes;  // lexicographic
  nn::Tensor2 weights;

  std::size_t size() const noexcept { return nodes.size(); }
  /// Throws DataError for an unknown id.
  std::size_t index_of(std::string_view cell) const;
  double weight(std::string_view a, std::string_view b) const;
  /// {"nodes": [...], "edges": [{"a","b","w"}...]} with w > 0, a < b.
  nlohmann::json to_json() const;
};

/// |Pearson correlation|; 0 when either input has zero variance.
double abs_pearson(std::span<const double> a, std::span<const double> b);

/// Pairwise weights over rows [row_begin, row_end) of `channel`. Needs at
/// least two cells of equal length. Pairs are evaluated in parallel.
SpatialGraph build_graph(std::span<const data::KpiSeries> cells, std::size_t channel, std::size_t row_begin,
                         std::size_t row_end);
/// Serial reference for build_graph.
SpatialGraph build_graph_serial(std::span<const data::KpiSeries> cells, std::size_t channel, std::size_t row_begin,
                                std::size_t row_end);

/// The k highest-weight neighbours of `cell`, descending by weight, ties
/// by cell id. Asking for more than exist returns all of them and fills
/// `diagnostic`.
std::vector<std::string> topk_neighbors(const SpatialGraph& graph, std::string_view cell, std::size_t k,
                                        std::string* diagnostic = nullptr);

/// Appends the neighbours' channels after the cell's own, in neighbour
/// order. Channel names become "<rank>:<name>" for neighbour rank 1..k.
/// Values and missing flags are copied unchanged.
data::KpiSeries augment_inputs(const data::KpiSeries& series,
                               std::span<const data::KpiSeries* const> neighbors);

}  // namespace deepauto::spatial
