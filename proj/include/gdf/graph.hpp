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

#ifndef GDF_GRAPH_HPP_
#define GDF_GRAPH_HPP_

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gdf/common.hpp"

namespace gdf {

// Undirected graph whose nodes carry one real feature column per modality.
// All columns share one sample axis, which the binary labels also index.
// Missing values inside a column are NaN; a missing (node, modality) pair is
// simply absent.
//
// Built incrementally by the loaders and generators below, then treated as
// immutable: training code only ever takes it by const reference.
class FeatureGraph {
 public:
  FeatureGraph() = default;

  // Returns the id of `name`, creating the node when it does not exist yet.
  NodeId add_node(std::string_view name);
  // Returns false for self-loops and already present edges.
  bool add_edge(NodeId u, NodeId v);

  // Registers a new modality. `columns` holds one entry per node; nullopt
  // marks a node without data for this modality.
  ModalityId add_modality(std::string name,
                          std::vector<std::optional<std::vector<double>>> columns);
  void set_labels(std::vector<int> labels);

  std::size_t num_nodes() const { return names_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_modalities() const { return modality_names_.size(); }
  std::size_t num_samples() const;
  bool has_labels() const { return !labels_.empty(); }

  const std::string& node_name(NodeId id) const { return names_.at(id); }
  std::optional<NodeId> find_node(std::string_view name) const;
  const std::vector<std::string>& node_names() const { return names_; }
  const std::string& modality_name(ModalityId id) const { return modality_names_.at(id); }
  std::optional<ModalityId> find_modality(std::string_view name) const;
  const std::vector<std::string>& modality_names() const { return modality_names_; }

  // Sorted adjacency list of `node`.
  std::span<const NodeId> neighbors(NodeId node) const { return adjacency_.at(node); }
  bool has_edge(NodeId u, NodeId v) const;
  // Edges in insertion order.
  const std::vector<Edge>& edges() const { return edges_; }

  bool has_feature(FeatureId f) const;
  std::span<const double> column(FeatureId f) const;
  double value(FeatureId f, std::size_t sample) const {
    return columns_[column_index_[f.modality * num_nodes() + f.node]][sample];
  }
  // Present features of `node` in modality order.
  std::vector<FeatureId> node_features(NodeId node) const;
  // Every present feature, ordered by (node, modality).
  std::vector<FeatureId> all_features() const;

  const std::vector<int>& labels() const { return labels_; }

 private:
  static constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> name_index_;
  std::vector<std::vector<NodeId>> adjacency_;
  std::vector<Edge> edges_;

  std::vector<std::string> modality_names_;
  // Row-major [modality][node] -> position in columns_, or kAbsent.
  std::vector<std::size_t> column_index_;
  std::vector<std::vector<double>> columns_;
  std::size_t n_samples_ = 0;

  std::vector<int> labels_;
};

// Row accessor over one sample of a FeatureGraph.
struct GraphRow {
  const FeatureGraph* graph;
  std::size_t sample;

  double operator()(FeatureId f) const {
    return graph->has_feature(f) ? graph->value(f, sample) : std::nan("");
  }
};

// Random-walk visit sequence and the (unordered) edges it crossed.
struct Walk {
  std::vector<NodeId> visits;
  std::vector<Edge> traversed_edges;

  // Sorted, deduplicated visited nodes.
  std::vector<NodeId> node_set() const;
  // Sorted, deduplicated traversed edges.
  std::vector<Edge> edge_set() const;

  friend bool operator==(const Walk&, const Walk&) = default;
};

// Loading. Every loader skips blank lines and '#'-prefixed comment lines.
// Non-fatal problems are appended to `warnings` when it is non-null.

// TSV (or whitespace separated) edge list with two node-name columns; a third
// weight column is ignored. Self-loops and duplicate edges are dropped.
FeatureGraph load_graph(std::istream& in, std::vector<std::string>* warnings = nullptr);
FeatureGraph load_graph(const std::filesystem::path& path,
                        std::vector<std::string>* warnings = nullptr);

// CSV or TSV matrix whose header row names graph nodes and whose rows are
// samples. Empty cells and NA/NaN are missing values. Columns naming unknown
// nodes are dropped with a warning.
void attach_modality(FeatureGraph& graph, std::string name, std::istream& in,
                     std::vector<std::string>* warnings = nullptr);
void attach_modality(FeatureGraph& graph, std::string name, const std::filesystem::path& path,
                     std::vector<std::string>* warnings = nullptr);

// One 0/1 label per line.
void attach_labels(FeatureGraph& graph, std::istream& in);
void attach_labels(FeatureGraph& graph, const std::filesystem::path& path);

// Preferential-attachment graph: node i >= 1 links to `edges_per_step`
// distinct earlier nodes drawn with probability proportional to
// degree^power + 1. Nodes are named "1".."n".
FeatureGraph generate_barabasi(std::size_t n_nodes, double power, std::size_t edges_per_step,
                               std::uint64_t seed);

// Uniform random walk of exactly `size` visits inside the subgraph induced by
// `allowed_nodes`. A node with no neighbor inside the subset repeats itself
// for the remaining visits.
Walk random_walk(const FeatureGraph& graph, std::span<const NodeId> allowed_nodes,
                 std::size_t size, Rng& rng);
// Walk over the whole graph.
Walk random_walk(const FeatureGraph& graph, std::size_t size, Rng& rng);

std::vector<NodeId> neighbors(const FeatureGraph& graph, NodeId node);

// Every graph edge with both endpoints in `node_set`, sorted.
std::vector<Edge> induced_edges(const FeatureGraph& graph, std::span<const NodeId> node_set);

}  // namespace gdf

#endif  // GDF_GRAPH_HPP_
