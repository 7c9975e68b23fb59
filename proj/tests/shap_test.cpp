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

#include "gdf/shap.hpp"
#include "gdf/synth.hpp"
#include "test_util.hpp"

namespace gdf {
namespace {

using test::leaf;
using test::stump;

RowFn row_of(std::map<FeatureId, double> values) {
  return [values = std::move(values)](const FeatureId& f) {
    auto it = values.find(f);
    return it == values.end() ? std::nan("") : it->second;
  };
}

double sum_of(const ShapExplanation& e) {
  double s = e.baseline;
  for (const auto& [f, v] : e.attributions) s += v;
  return s;
}

// AND of two balanced binary features: the root splits on a, the a = 1 branch on b.
DecisionTree and_tree() {
  DecisionTree t;
  TreeNode root, inner;
  root.rule = {{0, 0}, 0.5};
  root.left = 1;
  root.right = 2;
  root.class_counts = {75, 25};
  inner.rule = {{1, 0}, 0.5};
  inner.left = 3;
  inner.right = 4;
  inner.class_counts = {25, 25};
  t.nodes = {root, leaf(50, 0), inner, leaf(25, 0), leaf(0, 25)};
  return t;
}

TEST(ConditionalExpectation, Examples) {
  DecisionTree t = stump({0, 0}, 0.5, leaf(0, 60), leaf(40, 0));
  RowFn row = row_of({{{0, 0}, 0.9}});
  EXPECT_DOUBLE_EQ(conditional_expectation(t, row, {}), 0.6);
  std::vector<FeatureId> all{{0, 0}};
  EXPECT_EQ(conditional_expectation(t, row, all), predict_proba(t, row));
  EXPECT_EQ(conditional_expectation(t, row, all), 0.0);

  test::RandomTreeMaker maker(5);
  for (int trial = 0; trial < 50; ++trial) {
    DecisionTree r = maker.make(6, 5);
    RowFn x = row_of(maker.row(6));
    std::vector<FeatureId> features = r.used_features();
    EXPECT_EQ(conditional_expectation(r, x, features), predict_proba(r, x));
    EXPECT_NEAR(conditional_expectation(r, x, {}), treeshap(r, x).baseline, 1e-12);
  }
}

TEST(BruteForceShap, SingleSplit) {
  DecisionTree t = stump({2, 1}, 0.5, leaf(30, 10), leaf(5, 55));
  RowFn row = row_of({{{2, 1}, 0.7}, {{0, 0}, 3.0}});
  ShapExplanation e = brute_force_shap(t, row);
  ASSERT_EQ(e.attributions.size(), 1u);
  std::vector<FeatureId> all{{2, 1}};
  EXPECT_DOUBLE_EQ(e.attributions.at({2, 1}),
                   conditional_expectation(t, row, all) - conditional_expectation(t, row, {}));
  ShapExplanation fast = treeshap(t, row);
  EXPECT_NEAR(fast.attributions.at({2, 1}), e.attributions.at({2, 1}), 1e-12);
}

TEST(BruteForceShap, Symmetry) {
  DecisionTree t = and_tree();
  for (double a : {0.0, 1.0}) {
    for (double b : {0.0, 1.0}) {
      RowFn row = row_of({{{0, 0}, a}, {{1, 0}, b}});
      if (a != b) continue;
      ShapExplanation e = brute_force_shap(t, row);
      EXPECT_NEAR(e.attributions.at({0, 0}), e.attributions.at({1, 0}), 1e-12);
      ShapExplanation fast = treeshap(t, row);
      EXPECT_NEAR(fast.attributions.at({0, 0}), fast.attributions.at({1, 0}), 1e-12);
    }
  }
  RowFn both = row_of({{{0, 0}, 1.0}, {{1, 0}, 1.0}});
  EXPECT_DOUBLE_EQ(brute_force_shap(t, both).attributions.at({0, 0}), 0.375);
}

TEST(BruteForceShap, EfficiencyAndCap) {
  test::RandomTreeMaker maker(11);
  for (int trial = 0; trial < 200; ++trial) {
    DecisionTree t = maker.make(1 + trial % 10, 6);
    RowFn row = row_of(maker.row(10));
    ShapExplanation e = brute_force_shap(t, row);
    EXPECT_NEAR(sum_of(e), predict_proba(t, row), 1e-12);
  }
  // Right-leaning chain of 21 splits on distinct features.
  DecisionTree chain;
  for (NodeId v = 0; v < 21; ++v) {
    TreeNode split;
    split.rule = {{v, 0}, 0.5};
    split.left = static_cast<std::int32_t>(chain.nodes.size() + 1);
    split.right = static_cast<std::int32_t>(chain.nodes.size() + 2);
    split.class_counts = {static_cast<std::int64_t>(21 - v), 1};
    chain.nodes.push_back(split);
    chain.nodes.push_back(leaf(1, 0));
  }
  chain.nodes.push_back(leaf(0, 1));
  RowFn row = row_of({});
  EXPECT_THROW(brute_force_shap(chain, row), std::invalid_argument);
}

TEST(TreeShap, MatchesBruteForceOnFuzzedTrees) {
  test::RandomTreeMaker maker(2025);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n_features = 1 + trial % 12;
    DecisionTree t = maker.make(n_features, 2 + trial % 8);
    RowFn row = row_of(maker.row(n_features));
    ShapExplanation slow = brute_force_shap(t, row);
    ShapExplanation fast = treeshap(t, row);
    ASSERT_EQ(slow.attributions.size(), fast.attributions.size());
    EXPECT_NEAR(slow.baseline, fast.baseline, 1e-12);
    EXPECT_EQ(slow.prediction, fast.prediction);
    for (const auto& [f, v] : slow.attributions) {
      worst = std::max(worst, std::abs(v - fast.attributions.at(f)));
    }
    EXPECT_NEAR(sum_of(fast), predict_proba(t, row), 1e-9);
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(TreeShap, NullPlayer) {
  test::RandomTreeMaker maker(8);
  for (int trial = 0; trial < 100; ++trial) {
    DecisionTree t = maker.make(8, 4);
    auto used = t.used_features();
    RowFn row = row_of(maker.row(8));
    ShapExplanation e = treeshap(t, row);
    for (NodeId v = 0; v < 8; ++v) {
      FeatureId f{v, 0};
      bool is_used = std::binary_search(used.begin(), used.end(), f);
      EXPECT_EQ(e.attributions.count(f) == 1, is_used);
    }
  }
}

FittedForest forest_of(std::vector<DecisionTree> trees) {
  FittedForest f;
  for (auto& t : trees) {
    ForestSlot slot;
    slot.best_tree = std::make_shared<const DecisionTree>(std::move(t));
    f.slots.push_back(slot);
  }
  return f;
}

TEST(ForestShap, Averaging) {
  RowFn row = row_of({{{0, 0}, 0.9}});
  DecisionTree up = stump({0, 0}, 0.5, leaf(35, 15), leaf(15, 35));
  DecisionTree down = stump({0, 0}, 0.5, leaf(15, 35), leaf(35, 15));
  EXPECT_NEAR(treeshap(up, row).attributions.at({0, 0}), 0.2, 1e-12);
  EXPECT_NEAR(treeshap(down, row).attributions.at({0, 0}), -0.2, 1e-12);
  ShapExplanation both = forest_shap(forest_of({up, down}), row);
  EXPECT_NEAR(both.attributions.at({0, 0}), 0.0, 1e-15);

  test::RandomTreeMaker maker(3);
  DecisionTree t = maker.make(5, 4);
  RowFn r = row_of(maker.row(5));
  ShapExplanation single = forest_shap(forest_of({t}), r);
  ShapExplanation direct = treeshap(t, r);
  EXPECT_EQ(single.baseline, direct.baseline);
  EXPECT_EQ(single.attributions, direct.attributions);
}

TEST(ForestShap, AdditivityOnFittedForest) {
  PlantedScenario s = plant_xor(generate_barabasi(20, 1.2, 1, 4), 4, ModalMode::kMulti, 300);
  ForestParams p;
  p.ntree = 20;
  p.niter = 6;
  GreedyForestState st = init_forest(s.graph, test::all_samples(300), p, 9);
  FittedForest f = run(st);
  for (std::size_t sample = 0; sample < 300; ++sample) {
    RowFn row = graph_row(s.graph, sample);
    ShapExplanation e = forest_shap(f, row);
    EXPECT_NEAR(sum_of(e), forest_predict(f, GraphRow{&s.graph, sample}), 1e-9);
  }
}

TEST(Svimp, Examples) {
  ShapExplanation a, b;
  a.attributions = {{{0, 0}, 0.1}, {{0, 1}, 0.2}, {{3, 0}, 0.0}};
  b.attributions = {{{0, 0}, -0.3}, {{0, 1}, -0.2}, {{3, 0}, 0.0}};
  std::vector<ShapExplanation> rows{a, b};
  ImportanceSummary sum = summarize_shap(rows);
  EXPECT_DOUBLE_EQ(sum.per_feature.at({0, 0}), 0.2);
  EXPECT_EQ(sum.per_feature.at({3, 0}), 0.0);
  EXPECT_DOUBLE_EQ(sum.per_node.at(0), 0.4);

  ShapExplanation c;
  c.attributions = {{{5, 0}, 0.2}, {{5, 1}, -0.05}};
  std::vector<ShapExplanation> one{c};
  EXPECT_DOUBLE_EQ(summarize_shap(one).per_node.at(5), 0.25);
  EXPECT_THROW(summarize_shap(std::vector<ShapExplanation>{}), std::invalid_argument);
  FittedForest f = forest_of({and_tree()});
  EXPECT_THROW(svimp(f, std::vector<RowFn>{}), std::invalid_argument);
}

TEST(Svimp, ExchangeableFeaturesTie) {
  FittedForest f = forest_of({and_tree()});
  std::vector<RowFn> rows;
  for (double a : {0.0, 1.0}) {
    for (double b : {0.0, 1.0}) rows.push_back(row_of({{{0, 0}, a}, {{1, 0}, b}}));
  }
  ImportanceSummary sum = svimp(f, rows);
  EXPECT_NEAR(sum.per_feature.at({0, 0}), sum.per_feature.at({1, 0}), 1e-9);
  for (const auto& [ft, v] : sum.per_feature) EXPECT_GE(v, 0.0);
}

TEST(Svimp, PlantedFeaturesLeadOnXorData) {
  PlantedScenario s = plant_xor(generate_barabasi(30, 1.2, 1, 6), 6, ModalMode::kSingle, 1000);
  std::vector<NodeId> nodes = s.planted_set();
  for (NodeId v = 0; nodes.size() < 7; ++v) {
    if (!std::count(nodes.begin(), nodes.end(), v)) nodes.push_back(v);
  }
  std::vector<FeatureId> pool;
  for (NodeId v : nodes) pool.push_back({v, 0});
  std::sort(pool.begin(), pool.end());
  Rng rng(1);
  DecisionTree t = fit_tree_on_pool(s.graph, pool, test::all_samples(1000), TreeParams{}, rng);
  ASSERT_EQ(oob_perf(t, s.graph), 1.0);
  FittedForest f = forest_of({t});
  std::vector<std::size_t> samples = test::all_samples(1000);
  ImportanceSummary sum = svimp(f, s.graph, samples);
  std::vector<std::pair<double, FeatureId>> order;
  for (const FeatureId& ft : pool) {
    auto it = sum.per_feature.find(ft);
    order.push_back({-(it == sum.per_feature.end() ? 0.0 : it->second), ft});
  }
  std::sort(order.begin(), order.end());
  auto pf = s.planted_features();
  std::set<FeatureId> planted(pf.begin(), pf.end()), top;
  for (int i = 0; i < 4; ++i) top.insert(order[i].second);
  EXPECT_EQ(top, planted);
}

}  // namespace
}  // namespace gdf
