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

#include "gdf/tree.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace gdf {

namespace {

struct Item {
  std::uint32_t sample;
  std::uint32_t weight;
};

struct ScanEntry {
  double value;
  std::uint32_t weight;
  std::uint32_t label;
};

struct Split {
  std::size_t pool_index = 0;
  double threshold = 0.0;
  double gain = -1.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureGraph& graph, std::span<const FeatureId> pool, const TreeParams& params,
              Rng& rng)
      : labels_(graph.labels()), pool_(pool), params_(params), rng_(rng) {
    columns_.reserve(pool.size());
    for (const FeatureId& f : pool) columns_.push_back(graph.column(f));
    order_.resize(pool.size());
    std::iota(order_.begin(), order_.end(), 0);
    candidates_ = pool.size();
    if (params.split_candidates == SplitCandidates::kSqrt) {
      candidates_ = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(pool.size())))));
    }
  }

  std::vector<TreeNode> build(std::vector<Item> items) {
    items_ = std::move(items);
    nodes_.clear();
    grow(0, items_.size(), 0);
    return std::move(nodes_);
  }

 private:
  std::array<std::int64_t, 2> counts(std::size_t begin, std::size_t end) const {
    std::array<std::int64_t, 2> c{0, 0};
    for (std::size_t i = begin; i < end; ++i) c[labels_[items_[i].sample]] += items_[i].weight;
    return c;
  }

  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    TreeNode node;
    node.class_counts = counts(begin, end);
    const auto total = node.cover();
    node.probability = total > 0 ? static_cast<double>(node.class_counts[1]) / total : 0.0;

    const bool pure = node.class_counts[0] == 0 || node.class_counts[1] == 0;
    if (pure || depth >= params_.max_depth) {
      nodes_[index] = node;
      return index;
    }
    const Split best = find_split(begin, end);
    if (best.gain < 0.0 || best.gain < params_.min_gain) {
      nodes_[index] = node;
      return index;
    }

    // Partition: left values first, then right; missing values join the
    // child with the larger cover.
    const auto column = columns_[best.pool_index];
    std::int64_t left_cover = 0;
    std::int64_t right_cover = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = column[items_[i].sample];
      if (std::isnan(v)) continue;
      (v <= best.threshold ? left_cover : right_cover) += items_[i].weight;
    }
    const bool missing_left = left_cover >= right_cover;
    const auto mid = std::partition(items_.begin() + begin, items_.begin() + end,
                                    [&](const Item& it) {
                                      const double v = column[it.sample];
                                      return std::isnan(v) ? missing_left : v <= best.threshold;
                                    }) -
                     items_.begin();

    node.rule = {pool_[best.pool_index], best.threshold};
    node.gain = best.gain;
    node.left = grow(begin, mid, depth + 1);
    node.right = grow(mid, end, depth + 1);
    nodes_[index] = node;
    return index;
  }

  // Scans features in pool order, or, when subsampling, in a fresh random
  // order until `candidates_` non-constant features have been examined.
  Split find_split(std::size_t begin, std::size_t end) {
    Split best;
    const auto min_leaf = static_cast<std::int64_t>(params_.min_leaf);
    const bool subsample = candidates_ < columns_.size();
    if (subsample) std::shuffle(order_.begin(), order_.end(), rng_);
    std::size_t examined = 0;
    for (std::size_t o = 0; o < columns_.size() && examined < candidates_; ++o) {
      const std::size_t p = order_[o];
      const auto column = columns_[p];
      scan_.clear();
      std::array<std::int64_t, 2> parent{0, 0};
      for (std::size_t i = begin; i < end; ++i) {
        const Item& it = items_[i];
        const double v = column[it.sample];
        if (std::isnan(v)) continue;
        const auto y = static_cast<std::uint32_t>(labels_[it.sample]);
        scan_.push_back({v, it.weight, y});
        parent[y] += it.weight;
      }
      if (scan_.size() < 2) continue;
      std::sort(scan_.begin(), scan_.end(),
                [](const ScanEntry& a, const ScanEntry& b) { return a.value < b.value; });
      if (scan_.front().value == scan_.back().value) continue;
      ++examined;

      const double parent_gini = gini(parent);
      const double n = static_cast<double>(parent[0] + parent[1]);
      std::array<std::int64_t, 2> left{0, 0};
      for (std::size_t i = 0; i + 1 < scan_.size(); ++i) {
        left[scan_[i].label] += scan_[i].weight;
        if (scan_[i].value == scan_[i + 1].value) continue;
        const std::array<std::int64_t, 2> right{parent[0] - left[0], parent[1] - left[1]};
        const auto nl = left[0] + left[1];
        const auto nr = right[0] + right[1];
        if (nl < min_leaf || nr < min_leaf) continue;
        const double gain = parent_gini - (nl / n) * gini(left) - (nr / n) * gini(right);
        if (gain > best.gain || (subsample && gain == best.gain && p < best.pool_index)) {
          best.gain = gain;
          best.pool_index = p;
          best.threshold = scan_[i].value + (scan_[i + 1].value - scan_[i].value) / 2.0;
        }
      }
    }
    return best;
  }

  const std::vector<int>& labels_;
  std::span<const FeatureId> pool_;
  const TreeParams& params_;
  Rng& rng_;
  std::vector<std::span<const double>> columns_;
  std::vector<std::size_t> order_;
  std::size_t candidates_ = 0;
  std::vector<Item> items_;
  std::vector<TreeNode> nodes_;
  std::vector<ScanEntry> scan_;
};

DecisionTree fit_impl(const FeatureGraph& graph, std::vector<FeatureId> pool,
                      std::span<const std::size_t> sample_idx, const TreeParams& params,
                      Rng& rng) {
  if (sample_idx.empty()) throw std::invalid_argument("fit_tree: empty sample set");
  if (!graph.has_labels()) throw DataError("fit_tree: graph has no labels");
  if (params.min_leaf < 1 || params.max_depth < 1 || params.min_gain < 0.0) {
    throw std::invalid_argument("fit_tree: invalid tree parameters");
  }

  DecisionTree tree;
  const std::size_t n = sample_idx.size();
  std::uniform_int_distribution<std::size_t> draw(0, n - 1);
  std::vector<std::uint32_t> multiplicity(n, 0);
  tree.bootstrap_idx.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = draw(rng);
    ++multiplicity[pos];
    tree.bootstrap_idx.push_back(sample_idx[pos]);
  }
  std::vector<Item> items;
  items.reserve(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (multiplicity[pos] > 0) {
      items.push_back({static_cast<std::uint32_t>(sample_idx[pos]), multiplicity[pos]});
    } else {
      tree.oob_idx.push_back(sample_idx[pos]);
    }
  }

  TreeBuilder builder(graph, pool, params, rng);
  tree.nodes = builder.build(std::move(items));
  tree.feature_pool = std::move(pool);
  tree.oob_perf = oob_perf(tree, graph);
  return tree;
}

}  // namespace

std::vector<FeatureId> DecisionTree::used_features() const {
  std::vector<FeatureId> out;
  for (const auto& n : nodes) {
    if (!n.is_leaf()) out.push_back(n.rule.feature);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[nodes[i].left] = level[i] + 1;
      level[nodes[i].right] = level[i] + 1;
    }
  }
  return deepest;
}

std::map<FeatureId, double> DecisionTree::weighted_gains() const {
  std::map<FeatureId, double> out;
  if (nodes.empty()) return out;
  const double root = static_cast<double>(nodes[0].cover());
  for (const auto& n : nodes) {
    if (!n.is_leaf()) out[n.rule.feature] += n.gain * (static_cast<double>(n.cover()) / root);
  }
  return out;
}

double gini(std::span<const std::int64_t> class_counts) {
  std::int64_t total = 0;
  for (auto c : class_counts) {
    if (c < 0) throw std::invalid_argument("gini: negative count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("gini: zero total");
  double g = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g += p * (1.0 - p);
  }
  return g;
}

double gini_gain(const std::array<std::int64_t, 2>& parent, const std::array<std::int64_t, 2>& left,
                 const std::array<std::int64_t, 2>& right) {
  if (left[0] + right[0] != parent[0] || left[1] + right[1] != parent[1]) {
    throw std::invalid_argument("gini_gain: children do not sum to parent");
  }
  const auto nl = left[0] + left[1];
  const auto nr = right[0] + right[1];
  if (nl == 0 || nr == 0) throw std::invalid_argument("gini_gain: empty child");
  const double n = static_cast<double>(nl + nr);
  return gini(parent) - (nl / n) * gini(left) - (nr / n) * gini(right);
}

DecisionTree fit_tree(const FeatureGraph& graph, const Walk& walk,
                      std::span<const std::size_t> sample_idx, const TreeParams& params, Rng& rng) {
  if (walk.visits.empty()) throw std::invalid_argument("fit_tree: empty walk");
  auto nodes = walk.node_set();
  std::vector<FeatureId> pool;
  for (NodeId n : nodes) {
    for (const auto& f : graph.node_features(n)) pool.push_back(f);
  }
  if (pool.empty()) throw DataError("fit_tree: walk visits only nodes without features");
  DecisionTree tree = fit_impl(graph, std::move(pool), sample_idx, params, rng);
  tree.module_nodes = std::move(nodes);
  tree.module_edges = walk.edge_set();
  return tree;
}

DecisionTree fit_tree_on_pool(const FeatureGraph& graph, std::span<const FeatureId> pool,
                              std::span<const std::size_t> sample_idx, const TreeParams& params,
                              Rng& rng) {
  std::vector<FeatureId> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.empty()) throw std::invalid_argument("fit_tree: empty feature pool");
  for (const auto& f : sorted) {
    if (!graph.has_feature(f)) throw std::invalid_argument("fit_tree: absent feature in pool");
  }
  std::vector<NodeId> nodes;
  for (const auto& f : sorted) nodes.push_back(f.node);
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  DecisionTree tree = fit_impl(graph, std::move(sorted), sample_idx, params, rng);
  tree.module_nodes = std::move(nodes);
  return tree;
}

std::optional<double> roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("roc_auc: size mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positives = 0.0;
  double rank_sum = 0.0;  // sum of (1-based, tie-averaged) ranks of positives
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positives += 1.0;
        rank_sum += avg_rank;
      }
    }
    i = j;
  }
  const double negatives = static_cast<double>(n) - positives;
  if (positives == 0.0 || negatives == 0.0) return std::nullopt;
  const double u = rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

std::optional<double> oob_perf(const DecisionTree& tree, const FeatureGraph& graph) {
  if (tree.oob_idx.empty()) return std::nullopt;
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(tree.oob_idx.size());
  labels.reserve(tree.oob_idx.size());
  for (std::size_t s : tree.oob_idx) {
    scores.push_back(predict_proba(tree, GraphRow{&graph, s}));
    labels.push_back(graph.labels()[s]);
  }
  return roc_auc(scores, labels);
}

}  // namespace gdf
