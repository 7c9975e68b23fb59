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

#ifndef GDF_SYNTH_HPP_
#define GDF_SYNTH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "gdf/common.hpp"
#include "gdf/forest.hpp"
#include "gdf/graph.hpp"
#include "gdf/importance.hpp"
#include "gdf/tree.hpp"

namespace gdf {

enum class ModalMode {
  kSingle,  // (a(v1) & a(v2)) ^ (a(v3) & a(v4))
  kMulti,   // (a(v1) & b(v2)) ^ (a(v3) & b(v4))
};

struct PlantedScenario {
  FeatureGraph graph;
  // BFS order from the seeded start node.
  std::array<NodeId, 4> planted{};
  ModalMode mode = ModalMode::kSingle;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;

  // Sorted planted node set.
  std::vector<NodeId> planted_set() const;
  // The four columns the label formula reads, in formula order.
  std::array<FeatureId, 4> planted_features() const;
};

// XOR-of-ANDs label for four binary inputs.
constexpr int xor_module_label(int v1, int v2, int v3, int v4) { return (v1 & v2) ^ (v3 & v4); }

// Copies the feature-less `skeleton`, picks four connected nodes, fills every
// (node, modality) column with i.i.d. fair binary values and derives labels
// from the planted columns.
PlantedScenario plant_xor(const FeatureGraph& skeleton, std::uint64_t seed, ModalMode mode,
                          std::size_t n_samples);

// Four connected nodes reached by BFS from a seeded random start, in BFS order.
std::array<NodeId, 4> choose_connected_four(const FeatureGraph& graph, Rng& rng);

struct SampleSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class shuffled split keeping round(fraction * class size) samples of
// each class in train. Both lists are sorted.
SampleSplit stratified_split(std::span<const int> labels, double train_fraction,
                             std::uint64_t seed);

struct ExperimentConfig {
  std::size_t n_nodes = 50;
  double power = 1.2;
  std::size_t edges_per_step = 1;
  std::vector<std::size_t> niter_grid{10, 25, 50, 100, 200};
  std::size_t ntree = 100;
  std::size_t repetitions = 20;
  bool vary_topology = false;
  ModalMode modal = ModalMode::kSingle;
  std::size_t n_samples = 1000;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  TreeParams tree;
  AcceptRule accept_rule = AcceptRule::kNonDecreasing;
  RevertProposal revert = RevertProposal::kFreshWalk;
  int threads = 0;
};

struct ExperimentRecord {
  std::size_t repetition = 0;
  std::size_t niter = 0;
  bool top1_hit = false;
  std::size_t unique_modules = 0;
  // Held-out AUC of the forest on the test split.
  double auc = 0.0;
  // 1-based rank of the exact planted set, 0 when no slot carries it.
  std::size_t planted_rank = 0;
  // Perf of the exact planted module when present, else NaN.
  double planted_perf = 0.0;
  // The exact planted set ranks above every strict superset and strict
  // subset module (false when absent).
  bool ordering_ok = false;
  std::vector<NodeId> top_module;
};

struct ExperimentAggregate {
  std::size_t niter = 0;
  double coverage = 0.0;
  double median_unique = 0.0;
  double median_auc = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ExperimentRecord> records;

  std::vector<ExperimentAggregate> aggregate() const;
  std::vector<ExperimentRecord> at_niter(std::size_t niter) const;
};

// Scenario of one repetition. With fixed topology every repetition shares
// the same graph, planted nodes and feature values.
PlantedScenario build_scenario(const ExperimentConfig& config, std::size_t repetition);
SampleSplit repetition_split(const ExperimentConfig& config, const PlantedScenario& scenario,
                             std::size_t repetition);
std::uint64_t repetition_forest_seed(const ExperimentConfig& config, std::size_t repetition);
ForestParams repetition_forest_params(const ExperimentConfig& config);

// Evaluates a (partially) trained forest against the planted ground truth.
ExperimentRecord evaluate_snapshot(const FittedForest& forest, const PlantedScenario& scenario,
                                   std::span<const std::size_t> test_idx);

struct RepetitionOutcome {
  PlantedScenario scenario;
  SampleSplit split;
  FittedForest forest;
  std::vector<ExperimentRecord> records;
};

// Runs one repetition up to the largest grid value, recording snapshots at
// every grid point.
RepetitionOutcome run_repetition(const ExperimentConfig& config, std::size_t repetition);

using RepetitionObserver = std::function<void(const RepetitionOutcome&)>;
ExperimentResult coverage_experiment(const ExperimentConfig& config,
                                     const RepetitionObserver& observer = {});

struct BaselineResult {
  // Top-k features, most important first.
  std::vector<FeatureId> selected_features;
  std::map<FeatureId, double> importance;
  ClassificationReport report;
  double test_auc = 0.0;
};

// Plain bagged forest without graph guidance: each tree draws
// ceil(sqrt(#features)) features uniformly from all modalities. Features are
// ranked by accumulated weighted Gini gain; a second forest is then fitted on
// the top_k features only and evaluated on test_idx.
BaselineResult rf_baseline(const FeatureGraph& graph, std::span<const std::size_t> train_idx,
                           std::span<const std::size_t> test_idx, std::size_t n_trees,
                           std::size_t top_k, std::uint64_t seed, const TreeParams& params = {});

double median(std::vector<double> values);
// Interquartile range with linear interpolation between order statistics.
double interquartile_range(std::vector<double> values);

}  // namespace gdf

#endif  // GDF_SYNTH_HPP_
