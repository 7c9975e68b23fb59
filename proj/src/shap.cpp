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

#include "gdf/shap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace gdf {

namespace {

// Recursion shared by the subset evaluations. `known` is indexed by the
// node's local feature index.
double expectation(const DecisionTree& tree, std::size_t i, const std::vector<double>& values,
                   const std::vector<int>& local, const std::vector<char>& known) {
  const TreeNode& n = tree.nodes[i];
  if (n.is_leaf()) return n.probability;
  const int f = local[i];
  if (known[f]) return expectation(tree, tree.route(i, values[f]), values, local, known);
  const TreeNode& l = tree.nodes[n.left];
  const TreeNode& r = tree.nodes[n.right];
  const double cover = static_cast<double>(n.cover());
  return (static_cast<double>(l.cover()) * expectation(tree, n.left, values, local, known) +
          static_cast<double>(r.cover()) * expectation(tree, n.right, values, local, known)) /
         cover;
}

// Local dense indexing of a tree's split features.
struct LocalFeatures {
  std::vector<FeatureId> features;  // sorted
  std::vector<int> node_feature;    // per tree node, -1 for leaves
  std::vector<double> values;       // row values per local feature

  LocalFeatures(const DecisionTree& tree, const RowFn& row) : features(tree.used_features()) {
    node_feature.assign(tree.nodes.size(), -1);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
      if (tree.nodes[i].is_leaf()) continue;
      const auto it = std::lower_bound(features.begin(), features.end(), tree.nodes[i].rule.feature);
      node_feature[i] = static_cast<int>(it - features.begin());
    }
    values.reserve(features.size());
    for (const auto& f : features) values.push_back(row(f));
  }
};

// Decision-path element of the TreeSHAP recursion.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

void extend_path(PathElement* path, std::size_t depth, double zero_fraction, double one_fraction,
                 int feature) {
  path[depth] = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(depth) - 1; i >= 0; --i) {
    path[i + 1].pweight += one_fraction * path[i].pweight * static_cast<double>(i + 1) /
                           static_cast<double>(depth + 1);
    path[i].pweight = zero_fraction * path[i].pweight * static_cast<double>(depth - i) /
                      static_cast<double>(depth + 1);
  }
}

void unwind_path(PathElement* path, std::size_t depth, std::size_t index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].pweight;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(depth) - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = path[i].pweight;
      path[i].pweight = next_one_portion * static_cast<double>(depth + 1) /
                        (static_cast<double>(i + 1) * one_fraction);
      next_one_portion = tmp - path[i].pweight * zero_fraction * static_cast<double>(depth - i) /
                                   static_cast<double>(depth + 1);
    } else {
      path[i].pweight = path[i].pweight * static_cast<double>(depth + 1) /
                        (zero_fraction * static_cast<double>(depth - i));
    }
  }
  for (std::size_t i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero_fraction = path[i + 1].zero_fraction;
    path[i].one_fraction = path[i + 1].one_fraction;
  }
}

double unwound_path_sum(const PathElement* path, std::size_t depth, std::size_t index) {
  const double one_fraction = path[index].one_fraction;
  const double zero_fraction = path[index].zero_fraction;
  double next_one_portion = path[depth].pweight;
  double total = 0.0;
  for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(depth) - 1; i >= 0; --i) {
    if (one_fraction != 0.0) {
      const double tmp = next_one_portion * static_cast<double>(depth + 1) /
                         (static_cast<double>(i + 1) * one_fraction);
      total += tmp;
      next_one_portion = path[i].pweight - tmp * zero_fraction * static_cast<double>(depth - i) /
                                               static_cast<double>(depth + 1);
    } else if (zero_fraction != 0.0) {
      total += path[i].pweight / zero_fraction /
               (static_cast<double>(depth - i) / static_cast<double>(depth + 1));
    }
  }
  return total;
}

class TreeShapRecursion {
 public:
  TreeShapRecursion(const DecisionTree& tree, const LocalFeatures& local)
      : tree_(tree), local_(local) {
    const std::size_t max_depth = tree.depth() + 2;
    path_storage_.resize((max_depth + 1) * (max_depth + 2) / 2);
    phi_.assign(local.features.size(), 0.0);
  }

  std::vector<double> run() {
    recurse(0, 0, path_storage_.data(), 1.0, 1.0, -1);
    return phi_;
  }

 private:
  void recurse(std::size_t node, std::size_t depth, PathElement* parent_path,
               double parent_zero_fraction, double parent_one_fraction, int parent_feature) {
    PathElement* path = parent_path + depth + 1;
    std::copy(parent_path, parent_path + depth + 1, path);
    extend_path(path, depth, parent_zero_fraction, parent_one_fraction, parent_feature);

    const TreeNode& n = tree_.nodes[node];
    if (n.is_leaf()) {
      for (std::size_t i = 1; i <= depth; ++i) {
        const double w = unwound_path_sum(path, depth, i);
        const PathElement& el = path[i];
        phi_[el.feature] += w * (el.one_fraction - el.zero_fraction) * n.probability;
      }
      return;
    }

    const int feature = local_.node_feature[node];
    const auto hot = static_cast<std::size_t>(tree_.route(node, local_.values[feature]));
    const auto cold = hot == static_cast<std::size_t>(n.left) ? static_cast<std::size_t>(n.right)
                                                              : static_cast<std::size_t>(n.left);
    const double cover = static_cast<double>(n.cover());
    const double hot_zero_fraction = static_cast<double>(tree_.nodes[hot].cover()) / cover;
    const double cold_zero_fraction = static_cast<double>(tree_.nodes[cold].cover()) / cover;
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;

    // A feature split on again: undo its earlier extension first.
    std::size_t index = 0;
    for (; index <= depth; ++index) {
      if (path[index].feature == feature) break;
    }
    if (index != depth + 1) {
      incoming_zero_fraction = path[index].zero_fraction;
      incoming_one_fraction = path[index].one_fraction;
      unwind_path(path, depth, index);
      depth -= 1;
    }

    recurse(hot, depth + 1, path, hot_zero_fraction * incoming_zero_fraction,
            incoming_one_fraction, feature);
    recurse(cold, depth + 1, path, cold_zero_fraction * incoming_zero_fraction, 0.0, feature);
  }

  const DecisionTree& tree_;
  const LocalFeatures& local_;
  std::vector<PathElement> path_storage_;
  std::vector<double> phi_;
};

double root_expectation(const DecisionTree& tree) {
  double sum = 0.0;
  for (const auto& n : tree.nodes) {
    if (n.is_leaf()) sum += static_cast<double>(n.cover()) * n.probability;
  }
  return sum / static_cast<double>(tree.nodes[0].cover());
}

}  // namespace

double conditional_expectation(const DecisionTree& tree, const RowFn& row,
                               std::span<const FeatureId> known) {
  const LocalFeatures local(tree, row);
  std::vector<char> mask(local.features.size(), 0);
  for (const auto& f : known) {
    const auto it = std::lower_bound(local.features.begin(), local.features.end(), f);
    if (it != local.features.end() && *it == f) mask[it - local.features.begin()] = 1;
  }
  return expectation(tree, 0, local.values, local.node_feature, mask);
}

ShapExplanation brute_force_shap(const DecisionTree& tree, const RowFn& row) {
  const LocalFeatures local(tree, row);
  const std::size_t m = local.features.size();
  if (m > kMaxOracleFeatures) {
    throw std::invalid_argument("brute_force_shap: tree uses more than " +
                                std::to_string(kMaxOracleFeatures) + " features");
  }
  const std::size_t subsets = std::size_t{1} << m;
  std::vector<double> value(subsets);
  std::vector<char> mask(m, 0);
  for (std::size_t s = 0; s < subsets; ++s) {
    for (std::size_t j = 0; j < m; ++j) mask[j] = (s >> j) & 1U;
    value[s] = expectation(tree, 0, local.values, local.node_feature, mask);
  }
  // weight[k] = k! (m-k-1)! / m!
  std::vector<double> weight(m > 0 ? m : 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    weight[k] = std::exp(std::lgamma(static_cast<double>(k + 1)) +
                         std::lgamma(static_cast<double>(m - k)) -
                         std::lgamma(static_cast<double>(m + 1)));
  }

  ShapExplanation out;
  out.baseline = value[0];
  out.prediction = value[subsets - 1];
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t bit = std::size_t{1} << j;
    double sv = 0.0;
    for (std::size_t s = 0; s < subsets; ++s) {
      if (s & bit) continue;
      sv += weight[static_cast<std::size_t>(std::popcount(s))] * (value[s | bit] - value[s]);
    }
    out.attributions[local.features[j]] = sv;
  }
  return out;
}

ShapExplanation treeshap(const DecisionTree& tree, const RowFn& row) {
  const LocalFeatures local(tree, row);
  ShapExplanation out;
  out.baseline = root_expectation(tree);
  out.prediction = predict_proba(tree, [&row](const FeatureId& f) { return row(f); });
  if (!local.features.empty()) {
    const auto phi = TreeShapRecursion(tree, local).run();
    for (std::size_t j = 0; j < phi.size(); ++j) out.attributions[local.features[j]] = phi[j];
  }
  return out;
}

ShapExplanation forest_shap(const FittedForest& forest, const RowFn& row) {
  ShapExplanation out;
  std::size_t n = 0;
  for (const auto& slot : forest.slots) {
    if (!slot.has_tree()) continue;
    const auto e = treeshap(*slot.best_tree, row);
    out.baseline += e.baseline;
    out.prediction += e.prediction;
    for (const auto& [f, v] : e.attributions) out.attributions[f] += v;
    ++n;
  }
  if (n == 0) throw std::logic_error("forest_shap: forest has no fitted trees");
  const double scale = 1.0 / static_cast<double>(n);
  out.baseline *= scale;
  out.prediction = forest_predict(forest, [&row](const FeatureId& f) { return row(f); });
  for (auto& [f, v] : out.attributions) v *= scale;
  return out;
}

ImportanceSummary summarize_shap(std::span<const ShapExplanation> explanations) {
  if (explanations.empty()) throw std::invalid_argument("svimp: empty row set");
  ImportanceSummary out;
  for (const auto& e : explanations) {
    for (const auto& [f, v] : e.attributions) out.per_feature[f] += std::abs(v);
  }
  const double n = static_cast<double>(explanations.size());
  for (auto& [f, v] : out.per_feature) {
    v /= n;
    out.per_node[f.node] += v;
  }
  return out;
}

ImportanceSummary svimp(const FittedForest& forest, std::span<const RowFn> rows) {
  std::vector<ShapExplanation> explanations;
  explanations.reserve(rows.size());
  for (const auto& row : rows) explanations.push_back(forest_shap(forest, row));
  return summarize_shap(explanations);
}

ImportanceSummary svimp(const FittedForest& forest, const FeatureGraph& graph,
                        std::span<const std::size_t> samples) {
  std::vector<RowFn> rows;
  rows.reserve(samples.size());
  for (std::size_t s : samples) rows.push_back(graph_row(graph, s));
  return svimp(forest, rows);
}

}  // namespace gdf
