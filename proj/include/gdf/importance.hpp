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

#ifndef GDF_IMPORTANCE_HPP_
#define GDF_IMPORTANCE_HPP_

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "gdf/common.hpp"
#include "gdf/forest.hpp"

namespace gdf {

struct ModuleReport {
  std::vector<NodeId> module_nodes;
  // Union of the credited edges over every slot carrying this node set.
  std::vector<Edge> module_edges;
  // Best OOB AUC among the slots carrying this node set.
  double perf = 0.0;
  double norm_edge_imp = 0.0;
  // norm_edge_imp + perf.
  double imp_m = 0.0;
  std::size_t multiplicity = 0;
  // Set for modules without edges; their norm_edge_imp is 0.
  bool edgeless = false;
  std::map<FeatureId, double> feature_imps;
};

// Accumulated edge credit divided by iterations * ntree.
std::map<Edge, double> edge_importance(const FittedForest& forest);

// Mean importance over the module's edges; edges missing from the map count
// as 0 and an empty edge set yields 0.
double module_edge_importance(std::span<const Edge> module_edges,
                              const std::map<Edge, double>& edge_imp);

// Final slots grouped by module node set, sorted by imp_m descending, then
// smaller node set, then lexicographic node ids.
std::vector<ModuleReport> rank_modules(const FittedForest& forest);

std::size_t unique_module_count(const FittedForest& forest);

// Normalized accumulated Gini gain for every feature of the module's nodes
// that appears in a pool of a tree carrying the module (unused ones are 0).
std::map<FeatureId, double> node_feature_importance(const FittedForest& forest,
                                                    const ModuleReport& module);

// Normalized accumulated Gini gain of every feature that was ever split on.
std::map<FeatureId, double> feature_importance(const FittedForest& forest);

}  // namespace gdf

#endif  // GDF_IMPORTANCE_HPP_
