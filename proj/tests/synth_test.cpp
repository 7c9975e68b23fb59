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

#include "gdf/synth.hpp"
#include "test_util.hpp"

namespace gdf {
namespace {

TEST(XorLabel, TruthTable) {
  EXPECT_EQ(xor_module_label(1, 1, 0, 0), 1);
  EXPECT_EQ(xor_module_label(1, 1, 1, 1), 0);
  for (int p = 0; p < 16; ++p) {
    bool a = (p & 1) && (p & 2);
    bool b = (p & 4) && (p & 8);
    EXPECT_EQ(xor_module_label(p & 1, (p >> 1) & 1, (p >> 2) & 1, (p >> 3) & 1), a != b ? 1 : 0);
  }
}

bool connected_subset(const FeatureGraph& g, const std::vector<NodeId>& nodes) {
  std::set<NodeId> in(nodes.begin(), nodes.end()), seen{nodes[0]};
  std::vector<NodeId> stack{nodes[0]};
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId w : g.neighbors(v)) {
      if (in.count(w) && seen.insert(w).second) stack.push_back(w);
    }
  }
  return seen.size() == in.size();
}

TEST(PlantXor, LabelsMatchFormula) {
  for (ModalMode mode : {ModalMode::kSingle, ModalMode::kMulti}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      FeatureGraph skeleton = generate_barabasi(30, 1.2, 1, seed);
      PlantedScenario s = plant_xor(skeleton, seed, mode, 500);
      const FeatureGraph& g = s.graph;
      ASSERT_EQ(g.num_samples(), 500u);
      ASSERT_EQ(g.edges(), skeleton.edges());
      EXPECT_EQ(g.num_modalities(), mode == ModalMode::kMulti ? 2u : 1u);
      EXPECT_EQ(g.all_features().size(), 30u * g.num_modalities());
      auto pf = s.planted_features();
      for (int k = 0; k < 4; ++k) {
        EXPECT_EQ(pf[k].node, s.planted[k]);
        ModalityId want = mode == ModalMode::kMulti && k % 2 == 1 ? 1 : 0;
        EXPECT_EQ(pf[k].modality, want);
      }
      for (std::size_t i = 0; i < 500; ++i) {
        int bits[4];
        for (int k = 0; k < 4; ++k) bits[k] = g.value(pf[k], i) == 1.0;
        bool a = bits[0] && bits[1];
        bool b = bits[2] && bits[3];
        EXPECT_EQ(g.labels()[i], a != b ? 1 : 0);
      }
      for (const FeatureId& f : g.all_features()) {
        for (double x : g.column(f)) EXPECT_TRUE(x == 0.0 || x == 1.0);
      }
      auto set = s.planted_set();
      EXPECT_EQ(set.size(), 4u);
      EXPECT_TRUE(std::is_sorted(set.begin(), set.end()));
      EXPECT_TRUE(connected_subset(g, set));
    }
  }
}

TEST(PlantXor, Prevalence) {
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    PlantedScenario s = plant_xor(generate_barabasi(20, 1.2, 1, seed), seed, ModalMode::kSingle, 1000);
    double ones = static_cast<double>(std::count(s.graph.labels().begin(), s.graph.labels().end(), 1));
    EXPECT_NEAR(ones / 1000.0, 0.375, 0.05);
    total += ones;
  }
  EXPECT_NEAR(total / 10000.0, 0.375, 0.02);
}

TEST(PlantXor, Errors) {
  FeatureGraph small = test::graph_from_edges({{"a", "b"}, {"b", "c"}});
  EXPECT_THROW(plant_xor(small, 0, ModalMode::kSingle, 100), std::invalid_argument);
  FeatureGraph split = test::graph_from_edges({{"a", "b"}, {"c", "d"}, {"e", "f"}});
  EXPECT_THROW(plant_xor(split, 0, ModalMode::kSingle, 100), DataError);
}

TEST(ChooseConnectedFour, BfsOrder) {
  FeatureGraph g = generate_barabasi(40, 1.2, 1, 2);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    auto four = choose_connected_four(g, rng);
    std::vector<NodeId> nodes(four.begin(), four.end());
    for (std::size_t k = 1; k < 4; ++k) {
      bool linked = false;
      for (std::size_t j = 0; j < k; ++j) linked = linked || g.has_edge(nodes[j], nodes[k]);
      EXPECT_TRUE(linked);
    }
    EXPECT_EQ(std::set<NodeId>(nodes.begin(), nodes.end()).size(), 4u);
  }
}

TEST(StratifiedSplit, PreservesClasses) {
  std::vector<int> y;
  for (int i = 0; i < 1000; ++i) y.push_back(i % 8 < 3);
  SampleSplit s = stratified_split(y, 0.8, 4);
  EXPECT_EQ(s.train.size() + s.test.size(), 1000u);
  EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
  EXPECT_TRUE(std::is_sorted(s.test.begin(), s.test.end()));
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (std::size_t i : s.test) EXPECT_TRUE(all.insert(i).second);
  EXPECT_EQ(all.size(), 1000u);
  std::size_t pos_train = 0;
  for (std::size_t i : s.train) pos_train += y[i];
  EXPECT_EQ(pos_train, 300u);
  EXPECT_EQ(s.train.size(), 800u);
  EXPECT_EQ(stratified_split(y, 0.8, 4).train, s.train);
  EXPECT_NE(stratified_split(y, 0.8, 5).train, s.train);
  EXPECT_TRUE(stratified_split(y, 1.0, 4).test.empty());
  EXPECT_THROW(stratified_split(y, 0.0, 4), std::invalid_argument);
  EXPECT_THROW(stratified_split(y, 1.5, 4), std::invalid_argument);
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.n_nodes = 14;
  c.ntree = 10;
  c.niter_grid = {2, 5};
  c.repetitions = 3;
  c.n_samples = 200;
  return c;
}

bool same_graph(const FeatureGraph& a, const FeatureGraph& b) {
  if (a.edges() != b.edges() || a.labels() != b.labels()) return false;
  if (a.all_features() != b.all_features()) return false;
  for (const FeatureId& f : a.all_features()) {
    auto x = a.column(f), y = b.column(f);
    if (!std::equal(x.begin(), x.end(), y.begin(), y.end())) return false;
  }
  return true;
}

TEST(Scenario, FixedTopologyIsShared) {
  ExperimentConfig c = tiny_config();
  PlantedScenario first = build_scenario(c, 0);
  for (std::size_t rep = 1; rep < 5; ++rep) {
    PlantedScenario s = build_scenario(c, rep);
    EXPECT_TRUE(same_graph(first.graph, s.graph));
    EXPECT_EQ(first.planted, s.planted);
  }
  c.vary_topology = true;
  PlantedScenario a = build_scenario(c, 0), b = build_scenario(c, 1);
  EXPECT_FALSE(same_graph(a.graph, b.graph));
  EXPECT_TRUE(same_graph(a.graph, build_scenario(c, 0).graph));
}

TEST(Experiment, RecordsAndAggregates) {
  ExperimentConfig c = tiny_config();
  std::size_t observed = 0;
  ExperimentResult r = coverage_experiment(c, [&](const RepetitionOutcome& out) {
    ++observed;
    EXPECT_EQ(out.forest.iterations, 5u);
    EXPECT_EQ(out.records.size(), 2u);
  });
  EXPECT_EQ(observed, 3u);
  ASSERT_EQ(r.records.size(), c.repetitions * c.niter_grid.size());
  for (const ExperimentRecord& rec : r.records) {
    EXPECT_GE(rec.unique_modules, 1u);
    EXPECT_LE(rec.unique_modules, c.ntree);
    EXPECT_GE(rec.auc, 0.0);
    EXPECT_LE(rec.auc, 1.0);
    EXPECT_EQ(rec.planted_rank == 0, std::isnan(rec.planted_perf));
    EXPECT_EQ(rec.top1_hit, rec.planted_rank == 1);
  }
  auto agg = r.aggregate();
  ASSERT_EQ(agg.size(), 2u);
  for (const ExperimentAggregate& a : agg) {
    EXPECT_GE(a.coverage, 0.0);
    EXPECT_LE(a.coverage, 1.0);
    auto at = r.at_niter(a.niter);
    EXPECT_EQ(at.size(), c.repetitions);
    double hits = 0;
    std::vector<double> aucs;
    for (const auto& rec : at) {
      hits += rec.top1_hit;
      aucs.push_back(rec.auc);
    }
    EXPECT_EQ(a.coverage, hits / static_cast<double>(c.repetitions));
    EXPECT_EQ(a.median_auc, median(aucs));
  }
  ExperimentResult again = coverage_experiment(c);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(r.records[i].auc, again.records[i].auc);
    EXPECT_EQ(r.records[i].top_module, again.records[i].top_module);
  }
}

TEST(Experiment, SnapshotMatchesDirectRun) {
  ExperimentConfig c = tiny_config();
  RepetitionOutcome out = run_repetition(c, 1);
  ExperimentRecord last = evaluate_snapshot(out.forest, out.scenario, out.split.test);
  EXPECT_EQ(last.auc, out.records.back().auc);
  EXPECT_EQ(last.top_module, out.records.back().top_module);
  EXPECT_EQ(out.split.train, repetition_split(c, out.scenario, 1).train);
}

TEST(Experiment, EmptyGrid) {
  ExperimentConfig c = tiny_config();
  c.niter_grid = {};
  EXPECT_THROW(coverage_experiment(c), std::invalid_argument);
}

// Coverage over a reduced scenario grows with the number of iterations.
TEST(Experiment, CoverageAndUniqueModulesTrend) {
  ExperimentConfig c;
  c.n_nodes = 20;
  c.ntree = 40;
  c.niter_grid = {10, 50, 200};
  c.repetitions = 20;
  c.n_samples = 400;
  auto agg = coverage_experiment(c).aggregate();
  ASSERT_EQ(agg.size(), 3u);
  for (const auto& a : agg) {
    std::printf("niter %zu coverage %.2f median unique %.1f median auc %.3f\n", a.niter, a.coverage,
                a.median_unique, a.median_auc);
  }
  // One inversion of a single repetition is tolerated.
  EXPECT_GE(agg[1].coverage + 0.05, agg[0].coverage);
  EXPECT_GE(agg[2].coverage + 0.05, agg[1].coverage);
  EXPECT_GE(agg[0].median_unique, agg[1].median_unique);
  EXPECT_GE(agg[1].median_unique, agg[2].median_unique);
}

TEST(RfBaseline, NoiseIsChance) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    FeatureGraph g = generate_barabasi(20, 1.2, 1, seed);
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> cols(20, std::vector<double>(400));
    for (auto& c : cols) {
      for (double& x : c) x = std::normal_distribution<double>()(rng);
    }
    std::vector<int> y(400);
    for (int& v : y) v = static_cast<int>(rng() & 1);
    test::add_full_modality(g, "m", cols);
    g.set_labels(y);
    SampleSplit s = stratified_split(y, 0.7, seed);
    BaselineResult r = rf_baseline(g, s.train, s.test, 100, 4, seed);
    EXPECT_EQ(r.selected_features.size(), 4u);
    sum += r.test_auc;
  }
  EXPECT_NEAR(sum / 10.0, 0.5, 0.1);
}

TEST(RfBaseline, XorWithPlantedFeaturesSelected) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    PlantedScenario sc = plant_xor(generate_barabasi(12, 1.2, 1, seed), seed, ModalMode::kSingle, 1000);
    SampleSplit s = stratified_split(sc.graph.labels(), 0.8, seed);
    BaselineResult r = rf_baseline(sc.graph, s.train, s.test, 300, 6, seed);
    auto pf = sc.planted_features();
    bool covers = std::all_of(pf.begin(), pf.end(), [&](const FeatureId& f) {
      return std::count(r.selected_features.begin(), r.selected_features.end(), f) == 1;
    });
    if (!covers) continue;
    ++checked;
    EXPECT_GT(r.report.accuracy, 0.9);
  }
  EXPECT_GE(checked, 1u);
}

TEST(RfBaseline, Errors) {
  PlantedScenario sc = plant_xor(generate_barabasi(12, 1.2, 1, 0), 0, ModalMode::kSingle, 100);
  SampleSplit s = stratified_split(sc.graph.labels(), 0.8, 0);
  EXPECT_THROW(rf_baseline(sc.graph, s.train, s.test, 10, 0, 0), std::invalid_argument);
  EXPECT_THROW(rf_baseline(sc.graph, s.train, s.test, 0, 4, 0), std::invalid_argument);
}

TEST(Stats, MedianAndIqr) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  // Linear interpolation: Q1 at position 0.25 * (n - 1).
  EXPECT_DOUBLE_EQ(interquartile_range({1, 2, 3, 4, 5}), 4.0 - 2.0);
  EXPECT_DOUBLE_EQ(interquartile_range({1, 2, 3, 4}), 3.25 - 1.75);
  EXPECT_EQ(interquartile_range({7.0}), 0.0);
}

}  // namespace
}  // namespace gdf
