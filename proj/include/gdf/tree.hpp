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

#ifndef GDF_TREE_HPP_
#define GDF_TREE_HPP_

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gdf/common.hpp"
#include "gdf/graph.hpp"

namespace gdf {

// Features examined when searching the split of one tree node.
enum class SplitCandidates {
  kAll,   // every pool feature
  kSqrt,  // floor(sqrt(pool size)) features drawn per node
};

struct TreeParams {
  std::size_t min_leaf = 1;
  std::size_t max_depth = std::numeric_limits<std::size_t>::max();
  double min_gain = 1e-12;
  SplitCandidates split_candidates = SplitCandidates::kAll;
};

// value <= threshold goes left, value > threshold goes right.
struct SplitRule {
  FeatureId feature;
  double threshold = 0.0;
};

// Flat tree node. Internal nodes have left/right >= 0; leaves have -1.
// class_counts are bootstrap (with multiplicity) class counts of the
// training samples reaching the node, so cover() of an internal node equals
// the sum of its children's covers.
struct TreeNode {
  SplitRule rule;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::int64_t, 2> class_counts{0, 0};
  double probability = 0.0;
  // Gini gain of the split, internal nodes only.
  double gain = 0.0;

  bool is_leaf() const { return left < 0; }
  std::int64_t cover() const { return class_counts[0] + class_counts[1]; }
};

struct DecisionTree {
  // nodes[0] is the root; nodes are stored in preorder.
  std::vector<TreeNode> nodes;
  std::vector<FeatureId> feature_pool;
  std::vector<NodeId> module_nodes;
  std::vector<Edge> module_edges;
  std::vector<std::size_t> bootstrap_idx;
  std::vector<std::size_t> oob_idx;
  std::optional<double> oob_perf;

  // Distinct split features, sorted.
  std::vector<FeatureId> used_features() const;
  std::size_t depth() const;
  // Per split feature: sum over its splits of gain * cover(node) / cover(root).
  std::map<FeatureId, double> weighted_gains() const;
  // Child index a value is routed to at internal node `i`. Missing values
  // (NaN) follow the child with the larger cover, the left one on ties.
  std::int32_t route(std::size_t i, double value) const {
    const TreeNode& n = nodes[i];
    if (std::isnan(value)) {
      return nodes[n.left].cover() >= nodes[n.right].cover() ? n.left : n.right;
    }
    return value <= n.rule.threshold ? n.left : n.right;
  }
};

double gini(std::span<const std::int64_t> class_counts);
inline double gini(const std::array<std::int64_t, 2>& c) { return gini(std::span(c)); }
double gini_gain(const std::array<std::int64_t, 2>& parent, const std::array<std::int64_t, 2>& left,
                 const std::array<std::int64_t, 2>& right);

// Fits a tree on the present features of every node the walk visited.
// A bootstrap of |sample_idx| draws (with replacement) from sample_idx is the
// training set; the samples never drawn form the OOB set, on which oob_perf
// is evaluated.
DecisionTree fit_tree(const FeatureGraph& graph, const Walk& walk,
                      std::span<const std::size_t> sample_idx, const TreeParams& params, Rng& rng);
// Same learner over an explicit feature pool; module fields are derived from
// the pool's nodes and carry no edges.
DecisionTree fit_tree_on_pool(const FeatureGraph& graph, std::span<const FeatureId> pool,
                              std::span<const std::size_t> sample_idx, const TreeParams& params,
                              Rng& rng);

template <typename Row>
std::size_t leaf_index(const DecisionTree& tree, const Row& row) {
  std::size_t i = 0;
  while (!tree.nodes[i].is_leaf()) i = tree.route(i, row(tree.nodes[i].rule.feature));
  return i;
}

// Probability of class 1. `row` maps a FeatureId to its value (NaN if missing).
template <typename Row>
double predict_proba(const DecisionTree& tree, const Row& row) {
  return tree.nodes[leaf_index(tree, row)].probability;
}

// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie). nullopt unless
// both classes are present.
std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels);

// AUC of the tree's OOB predictions; nullopt when the OOB set is empty or
// single-class.
std::optional<double> oob_perf(const DecisionTree& tree, const FeatureGraph& graph);

}  // namespace gdf

#endif  // GDF_TREE_HPP_
