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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gdf/importance.hpp"
#include "gdf/synth.hpp"
#include "test_util.hpp"

namespace gdf {
namespace {

using test::all_samples;

ForestSlot slot_of(std::vector<NodeId> nodes, std::vector<Edge> edges, double perf) {
  auto tree = std::make_shared<DecisionTree>();
  tree->nodes = {test::leaf(1, 1)};
  tree->module_nodes = nodes;
  tree->module_edges = edges;
  for (NodeId v : nodes) tree->feature_pool.push_back({v, 0});
  tree->oob_perf = perf;
  ForestSlot slot;
  slot.best_tree = tree;
  slot.best_perf = perf;
  slot.module_edges = edges;
  slot.mtry = 2;
  return slot;
}

FittedForest forest_of(std::vector<ForestSlot> slots, std::size_t iterations) {
  FittedForest f;
  f.slots = std::move(slots);
  f.iterations = iterations;
  return f;
}

TEST(EdgeImportance, Normalization) {
  FittedForest f = forest_of({slot_of({0, 1}, {Edge(0, 1)}, 1.0)}, 1);
  f.edge_acc[Edge(0, 1)] = 1.0;
  auto imp = edge_importance(f);
  EXPECT_EQ(imp.at(Edge(0, 1)), 1.0);
  EXPECT_EQ(module_edge_importance(std::vector<Edge>{Edge(2, 3)}, imp), 0.0);

  FittedForest g = forest_of({slot_of({0, 1}, {Edge(0, 1)}, 1.0), slot_of({0, 1}, {Edge(0, 1)}, 1.0)}, 4);
  g.edge_acc[Edge(0, 1)] = 6.0;
  EXPECT_EQ(edge_importance(g).at(Edge(0, 1)), 6.0 / 8.0);
}

TEST(EdgeImportance, SingleSlotSingleIteration) {
  FeatureGraph g = test::graph_from_edges({{"a", "b"}});
  std::vector<int> y;
  for (int i = 0; i < 60; ++i) y.push_back(i % 2);
  std::vector<double> x(y.begin(), y.end());
  test::add_full_modality(g, "m", {x, x});
  g.set_labels(y);
  ForestParams p;
  p.ntree = 1;
  p.niter = 1;
  GreedyForestState st = init_forest(g, all_samples(60), p, 3);
  FittedForest f = run(st);
  ASSERT_EQ(f.slots[0].best_perf, 1.0);
  auto imp = edge_importance(f);
  ASSERT_EQ(imp.size(), 1u);
  EXPECT_EQ(imp.at(Edge(0, 1)), 1.0);
}

TEST(ModuleEdgeImportance, Mean) {
  std::map<Edge, double> imp{{Edge(0, 1), 0.6}, {Edge(1, 2), 0.8}, {Edge(2, 3), 0.52}};
  EXPECT_DOUBLE_EQ(module_edge_importance(std::vector<Edge>{Edge(0, 1), Edge(1, 2)}, imp), 0.7);
  EXPECT_EQ(module_edge_importance(std::vector<Edge>{Edge(2, 3)}, imp), 0.52);
  EXPECT_EQ(module_edge_importance(std::vector<Edge>{}, imp), 0.0);
}

TEST(RankModules, SingleModule) {
  std::vector<ForestSlot> slots(5, slot_of({1, 2}, {Edge(1, 2)}, 0.9));
  FittedForest f = forest_of(slots, 3);
  f.edge_acc[Edge(1, 2)] = 13.5;
  auto ranking = rank_modules(f);
  ASSERT_EQ(ranking.size(), 1u);
  EXPECT_EQ(ranking[0].multiplicity, 5u);
  EXPECT_EQ(ranking[0].perf, 0.9);
  EXPECT_EQ(ranking[0].norm_edge_imp, 13.5 / 15.0);
  EXPECT_EQ(unique_module_count(f), 1u);
}

TEST(RankModules, PerfBreaksEqualEdgeImportance) {
  FittedForest f = forest_of({slot_of({0, 1}, {Edge(0, 1)}, 0.5), slot_of({2, 3}, {Edge(2, 3)}, 1.0)}, 1);
  f.edge_acc = {{Edge(0, 1), 0.8}, {Edge(2, 3), 0.8}};
  auto ranking = rank_modules(f);
  ASSERT_EQ(ranking.size(), 2u);
  EXPECT_EQ(ranking[0].module_nodes, (std::vector<NodeId>{2, 3}));
  EXPECT_EQ(ranking[0].perf, 1.0);
  EXPECT_EQ(unique_module_count(f), 2u);
}

TEST(RankModules, TieBreaks) {
  // Equal imp_m everywhere: smaller node set first, then lexicographic ids.
  FittedForest f = forest_of({slot_of({4, 5, 6}, {Edge(4, 5), Edge(5, 6)}, 0.75),
                              slot_of({2, 3}, {Edge(2, 3)}, 0.75),
                              slot_of({0, 1}, {Edge(0, 1)}, 0.75)},
                             1);
  for (const Edge& e : {Edge(0, 1), Edge(2, 3), Edge(4, 5), Edge(5, 6)}) f.edge_acc[e] = 0.75;
  auto ranking = rank_modules(f);
  ASSERT_EQ(ranking.size(), 3u);
  EXPECT_EQ(ranking[0].module_nodes, (std::vector<NodeId>{0, 1}));
  EXPECT_EQ(ranking[1].module_nodes, (std::vector<NodeId>{2, 3}));
  EXPECT_EQ(ranking[2].module_nodes, (std::vector<NodeId>{4, 5, 6}));
}

TEST(RankModules, DuplicatesMergeByNodeSet) {
  FittedForest f = forest_of({slot_of({0, 1, 2}, {Edge(0, 1)}, 0.7),
                              slot_of({0, 1, 2}, {Edge(1, 2)}, 0.9),
                              slot_of({3}, {}, 0.6)},
                             2);
  f.edge_acc = {{Edge(0, 1), 1.2}, {Edge(1, 2), 0.4}};
  auto ranking = rank_modules(f);
  ASSERT_EQ(ranking.size(), 2u);
  const ModuleReport& m = ranking[0];
  EXPECT_EQ(m.module_nodes, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(m.module_edges, (std::vector<Edge>{Edge(0, 1), Edge(1, 2)}));
  EXPECT_EQ(m.perf, 0.9);
  EXPECT_EQ(m.multiplicity, 2u);
  EXPECT_DOUBLE_EQ(m.norm_edge_imp, (1.2 / 6.0 + 0.4 / 6.0) / 2.0);
  EXPECT_TRUE(ranking[1].edgeless);
  EXPECT_EQ(ranking[1].norm_edge_imp, 0.0);
  EXPECT_EQ(ranking[1].imp_m, 0.6);
}

TEST(NodeFeatureImportance, Normalization) {
  FittedForest f = forest_of({slot_of({0, 1}, {Edge(0, 1)}, 1.0)}, 1);
  f.feature_acc[{0, 0}] = 0.5;
  auto ranking = rank_modules(f);
  auto imp = node_feature_importance(f, ranking[0]);
  EXPECT_EQ(imp.at({0, 0}), 0.5);
  EXPECT_EQ(imp.at({1, 0}), 0.0);
  EXPECT_EQ(ranking[0].feature_imps, imp);
  EXPECT_EQ(feature_importance(f).count({1, 0}), 0u);
}

TEST(Importance, PropertiesOnFittedForests) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    PlantedScenario s = plant_xor(generate_barabasi(30, 1.2, 1, seed), seed,
                                  seed % 2 ? ModalMode::kMulti : ModalMode::kSingle, 300);
    ForestParams p;
    p.ntree = 20 + seed;
    p.niter = 12;
    p.module_edges = seed == 3 ? ModuleEdgeMode::kInduced : ModuleEdgeMode::kTraversed;
    GreedyForestState st = init_forest(s.graph, all_samples(300), p, seed);
    FittedForest f = run(st);
    auto ranking = rank_modules(f);
    std::size_t total = 0;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      const ModuleReport& m = ranking[i];
      EXPECT_EQ(m.imp_m, m.norm_edge_imp + m.perf);
      EXPECT_GE(m.multiplicity, 1u);
      total += m.multiplicity;
      EXPECT_GE(m.perf, 0.0);
      EXPECT_LE(m.perf, 1.0);
      EXPECT_GE(m.imp_m, 0.0);
      EXPECT_LE(m.imp_m, 2.0);
      for (const auto& [ft, x] : m.feature_imps) {
        EXPECT_TRUE(std::binary_search(m.module_nodes.begin(), m.module_nodes.end(), ft.node));
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
      }
      if (i > 0) {
        const ModuleReport& prev = ranking[i - 1];
        EXPECT_TRUE(prev.imp_m > m.imp_m ||
                    (prev.imp_m == m.imp_m &&
                     (prev.module_nodes.size() < m.module_nodes.size() ||
                      (prev.module_nodes.size() == m.module_nodes.size() &&
                       prev.module_nodes < m.module_nodes))));
      }
    }
    EXPECT_EQ(total, f.ntree());
    EXPECT_EQ(ranking.size(), unique_module_count(f));
    for (const auto& [e, x] : edge_importance(f)) {
      EXPECT_TRUE(s.graph.has_edge(e.a, e.b));
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    for (const auto& [ft, x] : feature_importance(f)) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
  }
}

// Planted-module feature recovery over seeded multi-modal runs.
TEST(NodeFeatureImportance, MultiModalPlantedFeaturesLead) {
  ExperimentConfig c;
  c.modal = ModalMode::kMulti;
  c.niter_grid = {100};
  c.repetitions = 20;
  c.seed = 3;
  std::size_t runs = 0, hits = 0, top_runs = 0, top_ok = 0;
  coverage_experiment(c, [&](const RepetitionOutcome& out) {
    ++runs;
    auto pf = out.scenario.planted_features();
    std::set<FeatureId> planted(pf.begin(), pf.end());
    ModuleReport module;
    module.module_nodes = out.scenario.planted_set();
    auto imp = node_feature_importance(out.forest, module);
    std::vector<std::pair<double, FeatureId>> order;
    for (const auto& [f, x] : imp) order.push_back({-x, f});
    std::sort(order.begin(), order.end());
    std::set<FeatureId> top;
    for (std::size_t i = 0; i < 4 && i < order.size(); ++i) top.insert(order[i].second);
    hits += top == planted;

    // When the planted set ranks first, its edge score beats every superset.
    auto ranking = rank_modules(out.forest);
    if (ranking[0].module_nodes != out.scenario.planted_set()) return;
    ++top_runs;
    bool ok = ranking[0].norm_edge_imp > 0.0 && ranking[0].norm_edge_imp <= 1.0;
    for (std::size_t i = 1; i < ranking.size(); ++i) {
      const auto& m = ranking[i].module_nodes;
      if (std::includes(m.begin(), m.end(), module.module_nodes.begin(), module.module_nodes.end())) {
        ok = ok && ranking[0].norm_edge_imp > ranking[i].norm_edge_imp;
      }
    }
    top_ok += ok;
  });
  std::printf("planted features in top 4: %zu of %zu runs\n", hits, runs);
  std::printf("edge score above supersets: %zu of %zu top-ranked runs\n", top_ok, top_runs);
  EXPECT_GE(static_cast<double>(hits), 0.9 * static_cast<double>(runs));
  EXPECT_EQ(top_ok, top_runs);
}

}  // namespace
}  // namespace gdf
