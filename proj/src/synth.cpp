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

#include "gdf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gdf {

std::vector<NodeId> PlantedScenario::planted_set() const {
  std::vector<NodeId> out(planted.begin(), planted.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::array<FeatureId, 4> PlantedScenario::planted_features() const {
  const ModalityId b = mode == ModalMode::kMulti ? 1 : 0;
  return {FeatureId{planted[0], 0}, FeatureId{planted[1], b}, FeatureId{planted[2], 0},
          FeatureId{planted[3], b}};
}

std::array<NodeId, 4> choose_connected_four(const FeatureGraph& graph, Rng& rng) {
  const std::size_t n = graph.num_nodes();
  std::vector<NodeId> starts(n);
  std::iota(starts.begin(), starts.end(), 0);
  std::shuffle(starts.begin(), starts.end(), rng);
  for (NodeId start : starts) {
    std::vector<NodeId> order{start};
    std::vector<char> seen(n, 0);
    seen[start] = 1;
    std::deque<NodeId> queue{start};
    while (!queue.empty() && order.size() < 4) {
      const NodeId u = queue.front();
      queue.pop_front();
      for (NodeId v : graph.neighbors(u)) {
        if (seen[v]) continue;
        seen[v] = 1;
        order.push_back(v);
        queue.push_back(v);
        if (order.size() == 4) break;
      }
    }
    if (order.size() == 4) return {order[0], order[1], order[2], order[3]};
  }
  throw DataError("plant_xor: graph has no connected 4-node subgraph");
}

PlantedScenario plant_xor(const FeatureGraph& skeleton, std::uint64_t seed, ModalMode mode,
                          std::size_t n_samples) {
  if (skeleton.num_nodes() < 4) throw std::invalid_argument("plant_xor: need at least 4 nodes");
  if (skeleton.num_modalities() != 0) {
    throw std::invalid_argument("plant_xor: skeleton already carries modalities");
  }
  if (n_samples < 2) throw std::invalid_argument("plant_xor: need at least 2 samples");

  PlantedScenario s;
  s.graph = skeleton;
  s.mode = mode;
  s.n_samples = n_samples;
  s.seed = seed;
  Rng rng(seed);
  s.planted = choose_connected_four(skeleton, rng);

  const std::size_t n_modalities = mode == ModalMode::kMulti ? 2 : 1;
  const char* names[] = {"a", "b"};
  for (std::size_t m = 0; m < n_modalities; ++m) {
    std::vector<std::optional<std::vector<double>>> columns(skeleton.num_nodes());
    for (auto& c : columns) {
      c.emplace(n_samples);
      for (auto& v : *c) v = static_cast<double>(rng() >> 63);
    }
    s.graph.add_modality(names[m], std::move(columns));
  }

  const auto f = s.planted_features();
  std::array<std::span<const double>, 4> cols;
  for (std::size_t i = 0; i < 4; ++i) cols[i] = s.graph.column(f[i]);
  std::vector<int> labels(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    labels[i] = xor_module_label(static_cast<int>(cols[0][i]), static_cast<int>(cols[1][i]),
                                 static_cast<int>(cols[2][i]), static_cast<int>(cols[3][i]));
  }
  s.graph.set_labels(std::move(labels));
  return s;
}

SampleSplit stratified_split(std::span<const int> labels, double train_fraction,
                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("split: train fraction must be in (0, 1]");
  }
  Rng rng(seed);
  SampleSplit out;
  for (int cls = 0; cls <= 1; ++cls) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
    out.test.insert(out.test.end(), members.begin() + n_train, members.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<ExperimentAggregate> ExperimentResult::aggregate() const {
  std::vector<ExperimentAggregate> out;
  for (std::size_t niter : config.niter_grid) {
    const auto rows = at_niter(niter);
    if (rows.empty()) continue;
    ExperimentAggregate a;
    a.niter = niter;
    std::vector<double> unique, auc;
    std::size_t hits = 0;
    for (const auto& r : rows) {
      hits += r.top1_hit ? 1 : 0;
      unique.push_back(static_cast<double>(r.unique_modules));
      auc.push_back(r.auc);
    }
    a.coverage = static_cast<double>(hits) / static_cast<double>(rows.size());
    a.median_unique = median(unique);
    a.median_auc = median(auc);
    out.push_back(a);
  }
  return out;
}

std::vector<ExperimentRecord> ExperimentResult::at_niter(std::size_t niter) const {
  std::vector<ExperimentRecord> out;
  for (const auto& r : records) {
    if (r.niter == niter) out.push_back(r);
  }
  return out;
}

PlantedScenario build_scenario(const ExperimentConfig& config, std::size_t repetition) {
  const std::uint64_t key = config.vary_topology ? repetition + 1 : 0;
  const auto skeleton = generate_barabasi(config.n_nodes, config.power, config.edges_per_step,
                                          derive_seed(config.seed, Stream::kGraph, key));
  return plant_xor(skeleton, derive_seed(config.seed, Stream::kScenario, key), config.modal,
                   config.n_samples);
}

SampleSplit repetition_split(const ExperimentConfig& config, const PlantedScenario& scenario,
                             std::size_t repetition) {
  return stratified_split(scenario.graph.labels(), config.train_fraction,
                          derive_seed(config.seed, Stream::kSplit, repetition));
}

std::uint64_t repetition_forest_seed(const ExperimentConfig& config, std::size_t repetition) {
  return derive_seed(config.seed, Stream::kForest, repetition);
}

ForestParams repetition_forest_params(const ExperimentConfig& config) {
  if (config.niter_grid.empty()) throw std::invalid_argument("experiment: empty niter grid");
  ForestParams params;
  params.ntree = config.ntree;
  params.niter = *std::max_element(config.niter_grid.begin(), config.niter_grid.end());
  params.tree = config.tree;
  params.accept = config.accept_rule;
  params.revert = config.revert;
  params.threads = config.threads;
  return params;
}

ExperimentRecord evaluate_snapshot(const FittedForest& forest, const PlantedScenario& scenario,
                                   std::span<const std::size_t> test_idx) {
  ExperimentRecord r;
  r.niter = forest.iterations;
  const auto ranking = rank_modules(forest);
  const auto planted = scenario.planted_set();
  if (!ranking.empty()) r.top_module = ranking.front().module_nodes;
  r.top1_hit = r.top_module == planted;
  r.unique_modules = unique_module_count(forest);
  r.planted_perf = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t i = 0; i < ranking.size(); ++i) {
    if (ranking[i].module_nodes == planted) {
      r.planted_rank = i + 1;
      r.planted_perf = ranking[i].perf;
      break;
    }
  }
  if (r.planted_rank > 0) {
    r.ordering_ok = true;
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      const auto& nodes = ranking[i].module_nodes;
      if (nodes == planted) continue;
      const bool superset = std::includes(nodes.begin(), nodes.end(), planted.begin(), planted.end());
      const bool subset = std::includes(planted.begin(), planted.end(), nodes.begin(), nodes.end());
      if ((superset || subset) && i + 1 < r.planted_rank) r.ordering_ok = false;
    }
  }

  if (!test_idx.empty()) {
    const auto scores = forest_predict(forest, scenario.graph, test_idx);
    std::vector<int> labels;
    for (std::size_t s : test_idx) labels.push_back(scenario.graph.labels()[s]);
    r.auc = roc_auc(scores, labels).value_or(0.5);
  } else {
    r.auc = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

RepetitionOutcome run_repetition(const ExperimentConfig& config, std::size_t repetition) {
  RepetitionOutcome out;
  out.scenario = build_scenario(config, repetition);
  out.split = repetition_split(config, out.scenario, repetition);
  auto state = init_forest(out.scenario.graph, out.split.train, repetition_forest_params(config),
                           repetition_forest_seed(config, repetition));
  const auto& grid = config.niter_grid;
  out.forest = run(state, [&](const GreedyForestState& s, const StepStats&) {
    if (std::find(grid.begin(), grid.end(), s.forest.iterations) == grid.end()) return;
    auto record = evaluate_snapshot(s.forest, out.scenario, out.split.test);
    record.repetition = repetition;
    out.records.push_back(std::move(record));
  });
  return out;
}

ExperimentResult coverage_experiment(const ExperimentConfig& config,
                                     const RepetitionObserver& observer) {
  ExperimentResult result;
  result.config = config;
  for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
    auto outcome = run_repetition(config, rep);
    result.records.insert(result.records.end(), outcome.records.begin(), outcome.records.end());
    if (observer) observer(outcome);
  }
  return result;
}

BaselineResult rf_baseline(const FeatureGraph& graph, std::span<const std::size_t> train_idx,
                           std::span<const std::size_t> test_idx, std::size_t n_trees,
                           std::size_t top_k, std::uint64_t seed, const TreeParams& params) {
  if (top_k == 0) throw std::invalid_argument("rf_baseline: top_k must be >= 1");
  if (n_trees == 0) throw std::invalid_argument("rf_baseline: n_trees must be >= 1");
  const auto features = graph.all_features();
  if (features.empty()) throw DataError("rf_baseline: graph has no features");
  const auto pool_size = std::min(
      features.size(),
      static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(features.size())))));

  BaselineResult out;
  for (const auto& f : features) out.importance[f] = 0.0;
  std::vector<FeatureId> pool;
  for (std::size_t t = 0; t < n_trees; ++t) {
    Rng rng = make_rng(seed, Stream::kBaseline, 0, t);
    pool.clear();
    std::sample(features.begin(), features.end(), std::back_inserter(pool), pool_size, rng);
    const auto tree = fit_tree_on_pool(graph, pool, train_idx, params, rng);
    for (const auto& [f, g] : tree.weighted_gains()) out.importance[f] += g;
  }
  for (auto& [f, v] : out.importance) v /= static_cast<double>(n_trees);

  std::vector<std::pair<FeatureId, double>> ranked(out.importance.begin(), out.importance.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t k = std::min(top_k, ranked.size());
  for (std::size_t i = 0; i < k; ++i) out.selected_features.push_back(ranked[i].first);

  if (test_idx.empty()) return out;
  std::vector<DecisionTree> refit;
  refit.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    Rng rng = make_rng(seed, Stream::kBaseline, 1, t);
    refit.push_back(fit_tree_on_pool(graph, out.selected_features, train_idx, params, rng));
  }
  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t s : test_idx) {
    double sum = 0.0;
    for (const auto& tree : refit) sum += predict_proba(tree, GraphRow{&graph, s});
    scores.push_back(sum / static_cast<double>(refit.size()));
    labels.push_back(graph.labels()[s]);
  }
  out.test_auc = roc_auc(scores, labels).value_or(0.5);
  out.report = classification_report(scores, labels);
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double interquartile_range(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return quantile(0.75) - quantile(0.25);
}

}  // namespace gdf
