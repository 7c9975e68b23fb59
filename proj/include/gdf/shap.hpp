/*
 * Copyright 2026 The GDF Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GDF_SHAP_HPP_
#define GDF_SHAP_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "gdf/common.hpp"
#include "gdf/forest.hpp"
#include "gdf/graph.hpp"
#include "gdf/tree.hpp"

namespace gdf {

// Maps a feature to its value in the explained row; NaN means missing.
using RowFn = std::function<double(const FeatureId&)>;

struct ShapExplanation {
  double baseline = 0.0;
  double prediction = 0.0;
  // One entry per feature used by the explained model(s).
  std::map<FeatureId, double> attributions;
};

struct ImportanceSummary {
  // Mean absolute attribution per (node, modality).
  std::map<FeatureId, double> per_feature;
  // Sum of per_feature over each node's modalities.
  std::map<NodeId, double> per_node;
};

// Path-dependent expectation of the tree output when only the features in
// `known` are fixed to the row's values: splits on unknown features average
// both children by training cover.
double conditional_expectation(const DecisionTree& tree, const RowFn& row,
                               std::span<const FeatureId> known);

// Exact Shapley values by enumerating every subset of the tree's split
// features. Refuses trees with more than kMaxOracleFeatures of them.
inline constexpr std::size_t kMaxOracleFeatures = 20;
ShapExplanation brute_force_shap(const DecisionTree& tree, const RowFn& row);

// Polynomial-time path-dependent TreeSHAP.
ShapExplanation treeshap(const DecisionTree& tree, const RowFn& row);

// Average of per-tree explanations over the forest's slots.
ShapExplanation forest_shap(const FittedForest& forest, const RowFn& row);

ImportanceSummary summarize_shap(std::span<const ShapExplanation> explanations);
ImportanceSummary svimp(const FittedForest& forest, std::span<const RowFn> rows);
ImportanceSummary svimp(const FittedForest& forest, const FeatureGraph& graph,
                        std::span<const std::size_t> samples);

inline RowFn graph_row(const FeatureGraph& graph, std::size_t sample) {
  return [&graph, sample](const FeatureId& f) { return GraphRow{&graph, sample}(f); };
}

}  // namespace gdf

#endif  // GDF_SHAP_HPP_
