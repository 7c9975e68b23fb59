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

#ifndef GDF_FOREST_HPP_
#define GDF_FOREST_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "gdf/common.hpp"
#include "gdf/graph.hpp"
#include "gdf/tree.hpp"

namespace gdf {

// Which edges a module is credited with in the edge-importance accumulator.
enum class ModuleEdgeMode {
  kTraversed,  // deduplicated edges crossed by the module's walk
  kInduced,    // every graph edge between module nodes
};

// When a slot's candidate tree replaces its best tree.
enum class AcceptRule {
  kStrict,          // perf > best_perf
  kNonDecreasing,   // perf >= best_perf
  kSmallerOnTie,    // perf > best_perf, or equal perf on a smaller node set
};

// Proposal a slot carries into the next iteration after a revert.
enum class RevertProposal {
  kPreviousWalk,  // refit the walk of the best tree
  kFreshWalk,     // new random walk of the current mtry inside the best module
};

struct ForestParams {
  std::size_t ntree = 100;
  std::size_t niter = 100;
  // Initial walk size; 0 selects ceil(sqrt(#V)).
  std::size_t mtry0 = 0;
  std::size_t mtry_floor = 2;
  TreeParams tree;
  ModuleEdgeMode module_edges = ModuleEdgeMode::kTraversed;
  AcceptRule accept = AcceptRule::kNonDecreasing;
  RevertProposal revert = RevertProposal::kFreshWalk;
  // Worker threads for per-slot fitting; 0 uses the OpenMP default. Results
  // do not depend on this value.
  int threads = 0;
};

std::size_t default_mtry(std::size_t n_nodes);

struct ForestSlot {
  Walk current_walk;
  // Walk that produced best_tree.
  Walk prev_walk;
  std::shared_ptr<const DecisionTree> best_tree;
  double best_perf = -std::numeric_limits<double>::infinity();
  std::size_t mtry = 0;
  // Edges credited to best_tree's module.
  std::vector<Edge> module_edges;

  bool has_tree() const { return best_tree != nullptr; }
};

// Everything the importance and explanation code needs after training.
struct FittedForest {
  ForestParams params;
  std::uint64_t seed = 0;
  // Greedy steps executed so far.
  std::size_t iterations = 0;
  std::vector<ForestSlot> slots;
  // Running sums of slot performance per module edge, and of weighted Gini
  // gain per split feature, over all post-resampling populations.
  std::map<Edge, double> edge_acc;
  std::map<FeatureId, double> feature_acc;

  std::size_t ntree() const { return slots.size(); }
};

struct GreedyForestState {
  const FeatureGraph* graph = nullptr;
  std::vector<std::size_t> train_idx;
  FittedForest forest;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t reverted = 0;
};

// Builds ntree slots, each holding an independent full-graph walk of size
// mtry0. No tree is fitted yet.
GreedyForestState init_forest(const FeatureGraph& graph, std::vector<std::size_t> train_idx,
                              const ForestParams& params, std::uint64_t seed);

// One greedy iteration: per slot fit + accept/revert, then perf-proportional
// resampling of the slots, then accumulation of edge and feature credit.
StepStats greedy_step(GreedyForestState& state);

using StepObserver = std::function<void(const GreedyForestState&, const StepStats&)>;

// Runs params.niter greedy steps on a fresh state.
FittedForest run(GreedyForestState& state, const StepObserver& observer = {});

// Draws `count` indices with replacement, index k with probability
// weights[k] / sum(weights). An all-zero vector draws uniformly.
std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count,
                                          Rng& rng);

// Mean class-1 probability over the best trees of all slots.
template <typename Row>
double forest_predict(const FittedForest& forest, const Row& row) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& slot : forest.slots) {
    if (!slot.has_tree()) continue;
    sum += predict_proba(*slot.best_tree, row);
    ++n;
  }
  if (n == 0) throw std::logic_error("forest_predict: forest has no fitted trees");
  return sum / static_cast<double>(n);
}

std::vector<double> forest_predict(const FittedForest& forest, const FeatureGraph& graph,
                                   std::span<const std::size_t> samples);

struct ClassificationReport {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double accuracy = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// Confusion-matrix metrics; a score >= threshold is a positive call.
// Precision is 0 when nothing is called positive.
ClassificationReport classification_report(std::span<const double> scores,
                                           std::span<const int> labels, double threshold = 0.5);
ClassificationReport classification_report(const FittedForest& forest, const FeatureGraph& graph,
                                           std::span<const std::size_t> test_idx,
                                           double threshold = 0.5);

}  // namespace gdf

#endif  // GDF_FOREST_HPP_
