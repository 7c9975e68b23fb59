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

#include "gdf/forest.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

namespace gdf {

namespace {

void validate(const FeatureGraph& graph, const ForestParams& params) {
  if (!graph.has_labels()) throw DataError("forest: graph has no labels");
  if (graph.num_modalities() == 0) throw DataError("forest: graph has no modalities");
  if (params.ntree < 1) throw std::invalid_argument("forest: ntree must be >= 1");
  if (params.mtry_floor < 1) throw std::invalid_argument("forest: mtry floor must be >= 1");
}

int thread_count(const ForestParams& params) {
  return params.threads > 0 ? params.threads : omp_get_max_threads();
}

// Steps (a)-(c) for one slot.
bool evolve_slot(const GreedyForestState& state, ForestSlot& slot, std::size_t k) {
  const FeatureGraph& graph = *state.graph;
  const ForestParams& params = state.forest.params;
  Rng rng = make_rng(state.forest.seed, Stream::kSlot, state.forest.iterations, k);

  auto candidate = std::make_shared<DecisionTree>(
      fit_tree(graph, slot.current_walk, state.train_idx, params.tree, rng));
  const double perf = candidate->oob_perf.value_or(0.5);
  bool accept = perf > slot.best_perf;
  if (!accept && perf == slot.best_perf) {
    switch (params.accept) {
      case AcceptRule::kStrict:
        break;
      case AcceptRule::kNonDecreasing:
        accept = true;
        break;
      case AcceptRule::kSmallerOnTie:
        accept = candidate->module_nodes.size() < slot.best_tree->module_nodes.size();
        break;
    }
  }
  if (!accept) {
    if (params.revert == RevertProposal::kFreshWalk && slot.has_tree()) {
      slot.current_walk = random_walk(graph, slot.best_tree->module_nodes, slot.mtry, rng);
    } else {
      slot.current_walk = slot.prev_walk;
    }
    return false;
  }
  slot.best_perf = perf;
  slot.module_edges = params.module_edges == ModuleEdgeMode::kInduced
                          ? induced_edges(graph, candidate->module_nodes)
                          : candidate->module_edges;
  slot.best_tree = std::move(candidate);
  slot.prev_walk = slot.current_walk;
  slot.mtry = std::max(slot.mtry > 0 ? slot.mtry - 1 : 0, params.mtry_floor);
  slot.current_walk = random_walk(graph, slot.best_tree->module_nodes, slot.mtry, rng);
  return true;
}

}  // namespace

std::size_t default_mtry(std::size_t n_nodes) {
  const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n_nodes))));
  return std::max<std::size_t>(root, 2);
}

GreedyForestState init_forest(const FeatureGraph& graph, std::vector<std::size_t> train_idx,
                              const ForestParams& params, std::uint64_t seed) {
  validate(graph, params);
  if (train_idx.empty()) throw DataError("forest: empty training set");
  GreedyForestState state;
  state.graph = &graph;
  state.train_idx = std::move(train_idx);
  state.forest.params = params;
  if (state.forest.params.mtry0 == 0) state.forest.params.mtry0 = default_mtry(graph.num_nodes());
  if (state.forest.params.mtry0 < 2) throw std::invalid_argument("forest: mtry0 must be >= 2");
  state.forest.seed = seed;
  state.forest.slots.resize(params.ntree);
  for (std::size_t k = 0; k < params.ntree; ++k) {
    Rng rng = make_rng(seed, Stream::kInitWalk, k);
    ForestSlot& slot = state.forest.slots[k];
    slot.mtry = state.forest.params.mtry0;
    slot.current_walk = random_walk(graph, slot.mtry, rng);
  }
  return state;
}

StepStats greedy_step(GreedyForestState& state) {
  FittedForest& forest = state.forest;
  if (forest.params.niter > 0 && forest.iterations >= forest.params.niter) {
    throw std::logic_error("greedy_step: all iterations already executed");
  }
  const std::size_t ntree = forest.slots.size();
  std::vector<char> accepted(ntree, 0);
  std::vector<std::exception_ptr> errors(ntree);

#pragma omp parallel for schedule(dynamic) num_threads(thread_count(forest.params))
  for (std::size_t k = 0; k < ntree; ++k) {
    try {
      accepted[k] = evolve_slot(state, forest.slots[k], k) ? 1 : 0;
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  StepStats stats;
  stats.accepted = static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), 1));
  stats.reverted = ntree - stats.accepted;

  std::vector<double> weights(ntree);
  for (std::size_t k = 0; k < ntree; ++k) weights[k] = forest.slots[k].best_perf;
  Rng rng = make_rng(forest.seed, Stream::kResample, forest.iterations);
  const auto picks = resample_indices(weights, ntree, rng);
  std::vector<ForestSlot> next;
  next.reserve(ntree);
  for (std::size_t k : picks) next.push_back(forest.slots[k]);
  forest.slots = std::move(next);

  for (const ForestSlot& slot : forest.slots) {
    for (const Edge& e : slot.module_edges) forest.edge_acc[e] += slot.best_perf;
    for (const auto& [f, g] : slot.best_tree->weighted_gains()) forest.feature_acc[f] += g;
  }
  ++forest.iterations;
  return stats;
}

FittedForest run(GreedyForestState& state, const StepObserver& observer) {
  if (state.forest.params.niter < 1) throw std::invalid_argument("niter must be >= 1");
  if (state.forest.iterations != 0) throw std::logic_error("run: state is not fresh");
  while (state.forest.iterations < state.forest.params.niter) {
    const StepStats stats = greedy_step(state);
    if (observer) observer(state, stats);
  }
  return state.forest;
}

std::vector<std::size_t> resample_indices(std::span<const double> weights, std::size_t count,
                                          Rng& rng) {
  if (weights.empty()) throw std::invalid_argument("resample: empty weight vector");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("resample: weights must be non-negative");
    total += w;
  }
  std::vector<std::size_t> out;
  out.reserve(count);
  if (total == 0.0) {
    std::uniform_int_distribution<std::size_t> uniform(0, weights.size() - 1);
    for (std::size_t i = 0; i < count; ++i) out.push_back(uniform(rng));
    return out;
  }
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  for (std::size_t i = 0; i < count; ++i) out.push_back(pick(rng));
  return out;
}

std::vector<double> forest_predict(const FittedForest& forest, const FeatureGraph& graph,
                                   std::span<const std::size_t> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (std::size_t s : samples) out.push_back(forest_predict(forest, GraphRow{&graph, s}));
  return out;
}

ClassificationReport classification_report(std::span<const double> scores,
                                           std::span<const int> labels, double threshold) {
  if (scores.size() != labels.size()) throw std::invalid_argument("report: size mismatch");
  if (scores.empty()) throw std::invalid_argument("report: empty test set");
  ClassificationReport r;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool called = scores[i] >= threshold;
    if (labels[i] == 1) {
      (called ? r.tp : r.fn) += 1;
    } else {
      (called ? r.fp : r.tn) += 1;
    }
  }
  if (r.tp + r.fn == 0 || r.tn + r.fp == 0) throw DataError("report: single-class test labels");
  r.sensitivity = static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
  r.recall = r.sensitivity;
  r.specificity = static_cast<double>(r.tn) / static_cast<double>(r.tn + r.fp);
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.accuracy = static_cast<double>(r.tp + r.tn) / static_cast<double>(scores.size());
  return r;
}

ClassificationReport classification_report(const FittedForest& forest, const FeatureGraph& graph,
                                           std::span<const std::size_t> test_idx,
                                           double threshold) {
  const auto scores = forest_predict(forest, graph, test_idx);
  std::vector<int> labels;
  labels.reserve(test_idx.size());
  for (std::size_t s : test_idx) labels.push_back(graph.labels()[s]);
  return classification_report(scores, labels, threshold);
}

}  // namespace gdf
