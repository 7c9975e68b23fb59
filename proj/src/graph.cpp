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

#include "gdf/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <utility>

namespace gdf {

namespace {

bool skippable(std::string_view line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string_view::npos || line[first] == '#';
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  if (delim == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string unquote(std::string_view s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

std::optional<double> parse_value(std::string_view s) {
  s = trim(s);
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "na") return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("unparseable value '" + std::string(s) + "'");
  }
  return v;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

}  // namespace

NodeId FeatureGraph::add_node(std::string_view name) {
  const std::string key(name);
  if (const auto it = name_index_.find(key); it != name_index_.end()) return it->second;
  if (!modality_names_.empty()) {
    throw std::logic_error("nodes cannot be added after modalities are attached");
  }
  const auto id = static_cast<NodeId>(names_.size());
  names_.push_back(key);
  name_index_.emplace(key, id);
  adjacency_.emplace_back();
  return id;
}

bool FeatureGraph::add_edge(NodeId u, NodeId v) {
  if (u >= num_nodes() || v >= num_nodes()) throw std::out_of_range("edge endpoint");
  if (u == v || has_edge(u, v)) return false;
  auto insert_sorted = [](std::vector<NodeId>& list, NodeId x) {
    list.insert(std::lower_bound(list.begin(), list.end(), x), x);
  };
  insert_sorted(adjacency_[u], v);
  insert_sorted(adjacency_[v], u);
  edges_.emplace_back(u, v);
  return true;
}

bool FeatureGraph::has_edge(NodeId u, NodeId v) const {
  if (u >= num_nodes() || v >= num_nodes()) return false;
  const auto& list = adjacency_[u];
  return std::binary_search(list.begin(), list.end(), v);
}

std::size_t FeatureGraph::num_samples() const {
  return modality_names_.empty() ? labels_.size() : n_samples_;
}

ModalityId FeatureGraph::add_modality(std::string name,
                                      std::vector<std::optional<std::vector<double>>> columns) {
  if (find_modality(name)) throw DataError("duplicate modality name '" + name + "'");
  if (columns.size() != num_nodes()) {
    throw std::invalid_argument("modality needs one (possibly absent) column per node");
  }
  std::optional<std::size_t> length;
  for (const auto& c : columns) {
    if (!c) continue;
    if (length && *length != c->size()) throw DataError("ragged modality columns");
    length = c->size();
  }
  if (length) {
    const bool have_reference = !modality_names_.empty() || !labels_.empty();
    const std::size_t expected = num_samples();
    if (have_reference && *length != expected) {
      throw DataError("sample-count mismatch: modality '" + name + "' has " +
                      std::to_string(*length) + " samples, expected " + std::to_string(expected));
    }
    if (!have_reference || modality_names_.empty()) n_samples_ = *length;
  } else if (modality_names_.empty()) {
    n_samples_ = labels_.size();
  }

  const auto id = static_cast<ModalityId>(modality_names_.size());
  modality_names_.push_back(std::move(name));
  column_index_.resize(modality_names_.size() * num_nodes(), kAbsent);
  for (NodeId n = 0; n < columns.size(); ++n) {
    if (!columns[n]) continue;
    column_index_[id * num_nodes() + n] = columns_.size();
    columns_.push_back(std::move(*columns[n]));
  }
  return id;
}

void FeatureGraph::set_labels(std::vector<int> labels) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("labels must be 0 or 1");
  }
  if (!modality_names_.empty() && labels.size() != n_samples_) {
    throw DataError("label length mismatch: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(n_samples_) + " samples");
  }
  const auto ones = std::count(labels.begin(), labels.end(), 1);
  if (ones == 0 || ones == static_cast<std::ptrdiff_t>(labels.size())) {
    throw DataError("single-class labels");
  }
  labels_ = std::move(labels);
}

std::optional<NodeId> FeatureGraph::find_node(std::string_view name) const {
  const auto it = name_index_.find(std::string(name));
  if (it == name_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ModalityId> FeatureGraph::find_modality(std::string_view name) const {
  for (ModalityId m = 0; m < modality_names_.size(); ++m) {
    if (modality_names_[m] == name) return m;
  }
  return std::nullopt;
}

bool FeatureGraph::has_feature(FeatureId f) const {
  return f.node < num_nodes() && f.modality < num_modalities() &&
         column_index_[f.modality * num_nodes() + f.node] != kAbsent;
}

std::span<const double> FeatureGraph::column(FeatureId f) const {
  if (!has_feature(f)) throw std::out_of_range("absent feature column");
  return columns_[column_index_[f.modality * num_nodes() + f.node]];
}

std::vector<FeatureId> FeatureGraph::node_features(NodeId node) const {
  std::vector<FeatureId> out;
  for (ModalityId m = 0; m < num_modalities(); ++m) {
    if (has_feature({node, m})) out.push_back({node, m});
  }
  return out;
}

std::vector<FeatureId> FeatureGraph::all_features() const {
  std::vector<FeatureId> out;
  for (NodeId n = 0; n < num_nodes(); ++n) {
    for (ModalityId m = 0; m < num_modalities(); ++m) {
      if (has_feature({n, m})) out.push_back({n, m});
    }
  }
  return out;
}

std::vector<NodeId> Walk::node_set() const {
  std::vector<NodeId> out = visits;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Edge> Walk::edge_set() const {
  std::vector<Edge> out = traversed_edges;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FeatureGraph load_graph(std::istream& in, std::vector<std::string>* warnings) {
  FeatureGraph g;
  std::string line;
  std::size_t line_no = 0;
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto fields = split_fields(line, ' ');
    if (fields.size() < 2) {
      throw DataError("edge list line " + std::to_string(line_no) + ": expected two node names");
    }
    const NodeId u = g.add_node(unquote(fields[0]));
    const NodeId v = g.add_node(unquote(fields[1]));
    if (u == v) {
      ++self_loops;
      if (warnings) warnings->push_back("line " + std::to_string(line_no) + ": self-loop dropped");
    } else if (!g.add_edge(u, v)) {
      ++duplicates;
      if (warnings) {
        warnings->push_back("line " + std::to_string(line_no) + ": duplicate edge dropped");
      }
    }
  }
  if (in.bad()) throw DataError("error reading edge list");
  if (g.num_edges() == 0) throw DataError("edge list has zero edges");
  return g;
}

FeatureGraph load_graph(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  return load_graph(in, warnings);
}

void attach_modality(FeatureGraph& graph, std::string name, std::istream& in,
                     std::vector<std::string>* warnings) {
  std::string line;
  std::vector<std::string> header;
  char delim = ',';
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    delim = line.find('\t') != std::string::npos ? '\t'
            : line.find(',') != std::string::npos ? ','
                                                  : ' ';
    for (auto f : split_fields(line, delim)) header.push_back(unquote(f));
    break;
  }
  if (header.empty()) throw DataError("modality '" + name + "': missing header row");

  // Column position -> node id (nullopt for dropped columns).
  std::vector<std::optional<NodeId>> targets;
  std::vector<char> seen(graph.num_nodes(), 0);
  for (const auto& h : header) {
    const auto id = graph.find_node(h);
    if (!id) {
      if (warnings) warnings->push_back("modality '" + name + "': unknown node '" + h + "' dropped");
      targets.emplace_back();
      continue;
    }
    if (seen[*id]) throw DataError("modality '" + name + "': duplicate column '" + h + "'");
    seen[*id] = 1;
    targets.emplace_back(*id);
  }

  std::vector<std::vector<double>> values(header.size());
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    const auto fields = split_fields(line, delim);
    if (fields.size() != header.size()) {
      throw DataError("modality '" + name + "': row " + std::to_string(rows + 1) + " has " +
                      std::to_string(fields.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!targets[c]) continue;
      const auto v = parse_value(fields[c]);
      values[c].push_back(v ? *v : std::nan(""));
    }
    ++rows;
  }
  if (rows == 0) throw DataError("modality '" + name + "': no sample rows");

  std::vector<std::optional<std::vector<double>>> columns(graph.num_nodes());
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (targets[c]) columns[*targets[c]] = std::move(values[c]);
  }
  graph.add_modality(std::move(name), std::move(columns));
}

void attach_modality(FeatureGraph& graph, std::string name, const std::filesystem::path& path,
                     std::vector<std::string>* warnings) {
  auto in = open_or_throw(path);
  attach_modality(graph, std::move(name), in, warnings);
}

void attach_labels(FeatureGraph& graph, std::istream& in) {
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (skippable(line)) continue;
    const auto t = trim(line);
    if (t == "0") {
      labels.push_back(0);
    } else if (t == "1") {
      labels.push_back(1);
    } else {
      throw DataError("non-binary label '" + std::string(t) + "'");
    }
  }
  graph.set_labels(std::move(labels));
}

void attach_labels(FeatureGraph& graph, const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  attach_labels(graph, in);
}

FeatureGraph generate_barabasi(std::size_t n_nodes, double power, std::size_t edges_per_step,
                               std::uint64_t seed) {
  if (n_nodes < 2) throw std::invalid_argument("barabasi: n_nodes must be >= 2");
  if (!(power > 0.0)) throw std::invalid_argument("barabasi: power must be > 0");
  if (edges_per_step < 1) throw std::invalid_argument("barabasi: edges_per_step must be >= 1");

  FeatureGraph g;
  for (std::size_t i = 0; i < n_nodes; ++i) g.add_node(std::to_string(i + 1));

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> degree(n_nodes, 0);
  std::vector<double> weight;
  std::vector<NodeId> targets;
  for (std::size_t i = 1; i < n_nodes; ++i) {
    weight.assign(i, 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
      weight[j] = std::pow(static_cast<double>(degree[j]), power) + 1.0;
      total += weight[j];
    }
    targets.clear();
    const std::size_t m = std::min(edges_per_step, i);
    while (targets.size() < m) {
      double r = unit(rng) * total;
      std::size_t pick = i - 1;
      for (std::size_t j = 0; j < i; ++j) {
        if (weight[j] == 0.0) continue;
        if (r < weight[j]) {
          pick = j;
          break;
        }
        r -= weight[j];
      }
      if (weight[pick] == 0.0) continue;  // rounding landed on a taken node
      targets.push_back(static_cast<NodeId>(pick));
      total -= weight[pick];
      weight[pick] = 0.0;
    }
    for (NodeId t : targets) {
      g.add_edge(static_cast<NodeId>(i), t);
      ++degree[i];
      ++degree[t];
    }
  }
  return g;
}

Walk random_walk(const FeatureGraph& graph, std::span<const NodeId> allowed_nodes,
                 std::size_t size, Rng& rng) {
  if (allowed_nodes.empty()) throw std::invalid_argument("random_walk: empty node set");
  if (size < 1) throw std::invalid_argument("random_walk: size must be >= 1");

  std::vector<NodeId> pool(allowed_nodes.begin(), allowed_nodes.end());
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  const bool whole_graph = pool.size() == graph.num_nodes();
  auto allowed = [&](NodeId n) {
    return whole_graph || std::binary_search(pool.begin(), pool.end(), n);
  };

  Walk walk;
  walk.visits.reserve(size);
  walk.traversed_edges.reserve(size - 1);
  NodeId current = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  walk.visits.push_back(current);
  std::vector<NodeId> options;
  bool stuck = false;
  while (walk.visits.size() < size) {
    if (!stuck) {
      options.clear();
      for (NodeId n : graph.neighbors(current)) {
        if (allowed(n)) options.push_back(n);
      }
      stuck = options.empty();
    }
    if (stuck) {
      walk.visits.push_back(current);
      continue;
    }
    const NodeId next = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    walk.traversed_edges.emplace_back(current, next);
    walk.visits.push_back(next);
    current = next;
  }
  return walk;
}

Walk random_walk(const FeatureGraph& graph, std::size_t size, Rng& rng) {
  std::vector<NodeId> all(graph.num_nodes());
  for (NodeId i = 0; i < all.size(); ++i) all[i] = i;
  return random_walk(graph, all, size, rng);
}

std::vector<NodeId> neighbors(const FeatureGraph& graph, NodeId node) {
  const auto adj = graph.neighbors(node);
  return {adj.begin(), adj.end()};
}

std::vector<Edge> induced_edges(const FeatureGraph& graph, std::span<const NodeId> node_set) {
  std::vector<NodeId> nodes(node_set.begin(), node_set.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  std::vector<Edge> out;
  for (NodeId u : nodes) {
    for (NodeId v : graph.neighbors(u)) {
      if (v > u && std::binary_search(nodes.begin(), nodes.end(), v)) out.emplace_back(u, v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gdf
