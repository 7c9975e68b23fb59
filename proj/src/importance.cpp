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

#include "gdf/importance.hpp"

#include <algorithm>

namespace gdf {

namespace {

double normalizer(const FittedForest& forest) {
  const double n = static_cast<double>(forest.iterations) * static_cast<double>(forest.ntree());
  return n > 0.0 ? n : 1.0;
}

}  // namespace

std::map<Edge, double> edge_importance(const FittedForest& forest) {
  const double n = normalizer(forest);
  std::map<Edge, double> out;
  for (const auto& [e, acc] : forest.edge_acc) out.emplace(e, acc / n);
  return out;
}

double module_edge_importance(std::span<const Edge> module_edges,
                              const std::map<Edge, double>& edge_imp) {
  if (module_edges.empty()) return 0.0;
  double sum = 0.0;
  for (const Edge& e : module_edges) {
    if (const auto it = edge_imp.find(e); it != edge_imp.end()) sum += it->second;
  }
  return sum / static_cast<double>(module_edges.size());
}

std::vector<ModuleReport> rank_modules(const FittedForest& forest) {
  std::map<std::vector<NodeId>, ModuleReport> groups;
  for (const ForestSlot& slot : forest.slots) {
    if (!slot.has_tree()) continue;
    ModuleReport& r = groups[slot.best_tree->module_nodes];
    if (r.multiplicity == 0) {
      r.module_nodes = slot.best_tree->module_nodes;
      r.perf = slot.best_perf;
    } else {
      r.perf = std::max(r.perf, slot.best_perf);
    }
    ++r.multiplicity;
    r.module_edges.insert(r.module_edges.end(), slot.module_edges.begin(), slot.module_edges.end());
  }

  const auto edge_imp = edge_importance(forest);
  std::vector<ModuleReport> out;
  out.reserve(groups.size());
  for (auto& [nodes, r] : groups) {
    std::sort(r.module_edges.begin(), r.module_edges.end());
    r.module_edges.erase(std::unique(r.module_edges.begin(), r.module_edges.end()),
                         r.module_edges.end());
    r.edgeless = r.module_edges.empty();
    r.norm_edge_imp = module_edge_importance(r.module_edges, edge_imp);
    r.imp_m = r.norm_edge_imp + r.perf;
    r.feature_imps = node_feature_importance(forest, r);
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const ModuleReport& a, const ModuleReport& b) {
    if (a.imp_m != b.imp_m) return a.imp_m > b.imp_m;
    if (a.module_nodes.size() != b.module_nodes.size()) {
      return a.module_nodes.size() < b.module_nodes.size();
    }
    return a.module_nodes < b.module_nodes;
  });
  return out;
}

std::size_t unique_module_count(const FittedForest& forest) {
  std::vector<std::vector<NodeId>> sets;
  for (const ForestSlot& slot : forest.slots) {
    if (slot.has_tree()) sets.push_back(slot.best_tree->module_nodes);
  }
  std::sort(sets.begin(), sets.end());
  return static_cast<std::size_t>(std::unique(sets.begin(), sets.end()) - sets.begin());
}

std::map<FeatureId, double> node_feature_importance(const FittedForest& forest,
                                                    const ModuleReport& module) {
  const auto& nodes = module.module_nodes;
  auto in_module = [&](NodeId n) { return std::binary_search(nodes.begin(), nodes.end(), n); };
  std::map<FeatureId, double> out;
  for (const ForestSlot& slot : forest.slots) {
    if (!slot.has_tree() || slot.best_tree->module_nodes != nodes) continue;
    for (const FeatureId& f : slot.best_tree->feature_pool) out.emplace(f, 0.0);
  }
  const double n = normalizer(forest);
  for (const auto& [f, acc] : forest.feature_acc) {
    if (in_module(f.node)) out[f] = acc / n;
  }
  return out;
}

std::map<FeatureId, double> feature_importance(const FittedForest& forest) {
  const double n = normalizer(forest);
  std::map<FeatureId, double> out;
  for (const auto& [f, acc] : forest.feature_acc) out.emplace(f, acc / n);
  return out;
}

}  // namespace gdf
