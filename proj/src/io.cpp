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

#include "gdf/io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace gdf {

using nlohmann::json;

namespace {

constexpr const char* kBundleFormat = "gdf-forest";
constexpr int kBundleVersion = 1;

template <typename E, std::size_t N>
E parse_enum(std::string_view name, const std::pair<E, std::string_view> (&table)[N],
             const char* what) {
  for (const auto& [value, spelling] : table) {
    if (spelling == name) return value;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(name));
}

template <typename E, std::size_t N>
std::string_view enum_name(E value, const std::pair<E, std::string_view> (&table)[N]) {
  for (const auto& [v, spelling] : table) {
    if (v == value) return spelling;
  }
  return "?";
}

constexpr std::pair<AcceptRule, std::string_view> kAcceptNames[] = {
    {AcceptRule::kStrict, "strict"},
    {AcceptRule::kNonDecreasing, "non-decreasing"},
    {AcceptRule::kSmallerOnTie, "smaller-on-tie"},
};
constexpr std::pair<RevertProposal, std::string_view> kRevertNames[] = {
    {RevertProposal::kPreviousWalk, "previous-walk"},
    {RevertProposal::kFreshWalk, "fresh-walk"},
};
constexpr std::pair<ModuleEdgeMode, std::string_view> kEdgeModeNames[] = {
    {ModuleEdgeMode::kTraversed, "traversed"},
    {ModuleEdgeMode::kInduced, "induced"},
};
constexpr std::pair<SplitCandidates, std::string_view> kSplitNames[] = {
    {SplitCandidates::kAll, "all"},
    {SplitCandidates::kSqrt, "sqrt"},
};
constexpr std::pair<ModalMode, std::string_view> kModalNames[] = {
    {ModalMode::kSingle, "single"},
    {ModalMode::kMulti, "multi"},
};

// Translates ids to the names stored in files and back.
class Codec {
 public:
  explicit Codec(const NameTable& names) : names_(names) {
    for (NodeId i = 0; i < names.nodes.size(); ++i) {
      if (!node_ids_.emplace(names.nodes[i], i).second) {
        throw DataError("bundle: duplicate node name '" + names.nodes[i] + "'");
      }
    }
    for (ModalityId i = 0; i < names.modalities.size(); ++i) {
      if (!modality_ids_.emplace(names.modalities[i], i).second) {
        throw DataError("bundle: duplicate modality name '" + names.modalities[i] + "'");
      }
    }
  }

  json node(NodeId n) const { return names_.nodes.at(n); }
  NodeId node_of(const json& j) const {
    const auto it = node_ids_.find(j.get<std::string>());
    if (it == node_ids_.end()) throw DataError("bundle: unknown node '" + j.get<std::string>() + "'");
    return it->second;
  }

  json nodes(std::span<const NodeId> ns) const {
    json out = json::array();
    for (NodeId n : ns) out.push_back(node(n));
    return out;
  }
  std::vector<NodeId> nodes_of(const json& j) const {
    std::vector<NodeId> out;
    for (const auto& n : j) out.push_back(node_of(n));
    return out;
  }

  json feature(const FeatureId& f) const {
    return json::array({names_.nodes.at(f.node), names_.modalities.at(f.modality)});
  }
  FeatureId feature_of(const json& j) const {
    const auto it = modality_ids_.find(j.at(1).get<std::string>());
    if (it == modality_ids_.end()) {
      throw DataError("bundle: unknown modality '" + j.at(1).get<std::string>() + "'");
    }
    return FeatureId{node_of(j.at(0)), it->second};
  }

  json edge(const Edge& e) const { return json::array({node(e.a), node(e.b)}); }
  Edge edge_of(const json& j) const { return Edge(node_of(j.at(0)), node_of(j.at(1))); }

  json edges(std::span<const Edge> es) const {
    json out = json::array();
    for (const Edge& e : es) out.push_back(edge(e));
    return out;
  }
  std::vector<Edge> edges_of(const json& j) const {
    std::vector<Edge> out;
    for (const auto& e : j) out.push_back(edge_of(e));
    return out;
  }

  json walk(const Walk& w) const {
    return json{{"visits", nodes(w.visits)}, {"edges", edges(w.traversed_edges)}};
  }
  Walk walk_of(const json& j) const {
    return Walk{nodes_of(j.at("visits")), edges_of(j.at("edges"))};
  }

 private:
  const NameTable& names_;
  std::unordered_map<std::string, NodeId> node_ids_;
  std::unordered_map<std::string, ModalityId> modality_ids_;
};

json tree_node_json(const DecisionTree& tree, std::size_t i, const Codec& codec) {
  const TreeNode& n = tree.nodes[i];
  json jn{{"counts", json::array({n.class_counts[0], n.class_counts[1]})},
          {"probability", n.probability}};
  if (!n.is_leaf()) {
    jn["feature"] = codec.feature(n.rule.feature);
    jn["threshold"] = n.rule.threshold;
    jn["gain"] = n.gain;
    jn["left"] = tree_node_json(tree, n.left, codec);
    jn["right"] = tree_node_json(tree, n.right, codec);
  }
  return jn;
}

// Appends the subtree in preorder and returns the index of its root.
std::int32_t append_tree_node(DecisionTree& tree, const json& jn, const Codec& codec) {
  const auto index = static_cast<std::int32_t>(tree.nodes.size());
  TreeNode n;
  n.class_counts = {jn.at("counts").at(0).get<std::int64_t>(),
                    jn.at("counts").at(1).get<std::int64_t>()};
  if (n.class_counts[0] < 0 || n.class_counts[1] < 0) throw DataError("negative class count");
  n.probability = jn.at("probability").get<double>();
  tree.nodes.push_back(n);
  if (jn.contains("left") || jn.contains("right")) {
    TreeNode& self = tree.nodes[index];
    self.rule.feature = codec.feature_of(jn.at("feature"));
    self.rule.threshold = jn.at("threshold").get<double>();
    self.gain = jn.at("gain").get<double>();
    const std::int32_t left = append_tree_node(tree, jn.at("left"), codec);
    const std::int32_t right = append_tree_node(tree, jn.at("right"), codec);
    TreeNode& parent = tree.nodes[index];
    parent.left = left;
    parent.right = right;
    const auto& l = tree.nodes[left].class_counts;
    const auto& r = tree.nodes[right].class_counts;
    if (parent.class_counts[0] != l[0] + r[0] || parent.class_counts[1] != l[1] + r[1]) {
      throw DataError("tree node counts differ from the sum of its children");
    }
  }
  return index;
}

DecisionTree tree_of(const json& j, const Codec& codec) {
  DecisionTree tree;
  append_tree_node(tree, j.at("root"), codec);
  for (const auto& f : j.at("pool")) tree.feature_pool.push_back(codec.feature_of(f));
  tree.module_nodes = codec.nodes_of(j.at("module_nodes"));
  tree.module_edges = codec.edges_of(j.at("module_edges"));
  if (!j.at("oob_perf").is_null()) tree.oob_perf = j.at("oob_perf").get<double>();
  return tree;
}

json tree_json(const DecisionTree& tree, const Codec& codec) {
  return json{
      {"root", tree_node_json(tree, 0, codec)},
      {"pool", [&] {
         json pool = json::array();
         for (const FeatureId& f : tree.feature_pool) pool.push_back(codec.feature(f));
         return pool;
       }()},
      {"module_nodes", codec.nodes(tree.module_nodes)},
      {"module_edges", codec.edges(tree.module_edges)},
      {"oob_perf", tree.oob_perf ? json(*tree.oob_perf) : json(nullptr)},
  };
}

json params_json(const ForestParams& p) {
  return json{
      {"ntree", p.ntree},
      {"niter", p.niter},
      {"mtry0", p.mtry0},
      {"mtry_floor", p.mtry_floor},
      {"min_leaf", p.tree.min_leaf},
      {"max_depth", p.tree.max_depth},
      {"min_gain", p.tree.min_gain},
      {"split_candidates", to_string(p.tree.split_candidates)},
      {"module_edges", to_string(p.module_edges)},
      {"accept", to_string(p.accept)},
      {"revert", to_string(p.revert)},
  };
}
ForestParams params_of(const json& j) {
  ForestParams p;
  p.ntree = j.at("ntree").get<std::size_t>();
  p.niter = j.at("niter").get<std::size_t>();
  p.mtry0 = j.at("mtry0").get<std::size_t>();
  p.mtry_floor = j.at("mtry_floor").get<std::size_t>();
  p.tree.min_leaf = j.at("min_leaf").get<std::size_t>();
  p.tree.max_depth = j.at("max_depth").get<std::size_t>();
  p.tree.min_gain = j.at("min_gain").get<double>();
  p.tree.split_candidates = parse_split_candidates(j.at("split_candidates").get<std::string>());
  p.module_edges = parse_module_edge_mode(j.at("module_edges").get<std::string>());
  p.accept = parse_accept_rule(j.at("accept").get<std::string>());
  p.revert = parse_revert_proposal(j.at("revert").get<std::string>());
  return p;
}

}  // namespace

std::string_view to_string(AcceptRule rule) { return enum_name(rule, kAcceptNames); }
std::string_view to_string(RevertProposal proposal) { return enum_name(proposal, kRevertNames); }
std::string_view to_string(ModuleEdgeMode mode) { return enum_name(mode, kEdgeModeNames); }
std::string_view to_string(SplitCandidates candidates) {
  return enum_name(candidates, kSplitNames);
}
std::string_view to_string(ModalMode mode) { return enum_name(mode, kModalNames); }

AcceptRule parse_accept_rule(std::string_view name) {
  return parse_enum(name, kAcceptNames, "accept rule");
}
RevertProposal parse_revert_proposal(std::string_view name) {
  return parse_enum(name, kRevertNames, "revert proposal");
}
ModuleEdgeMode parse_module_edge_mode(std::string_view name) {
  return parse_enum(name, kEdgeModeNames, "module edge mode");
}
SplitCandidates parse_split_candidates(std::string_view name) {
  return parse_enum(name, kSplitNames, "split candidates");
}
ModalMode parse_modal_mode(std::string_view name) {
  return parse_enum(name, kModalNames, "modal mode");
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

json tree_to_json(const DecisionTree& tree, const NameTable& names) {
  return tree_json(tree, Codec(names));
}

DecisionTree tree_from_json(const json& j, const NameTable& names) {
  try {
    return tree_of(j, Codec(names));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed tree: ") + e.what());
  }
}

json bundle_to_json(const ForestBundle& bundle) {
  const FittedForest& f = bundle.forest;
  const Codec codec(bundle.names);
  std::unordered_map<const DecisionTree*, std::size_t> tree_index;
  json trees = json::array();
  json slots = json::array();
  for (const ForestSlot& s : f.slots) {
    json js{
        {"current_walk", codec.walk(s.current_walk)},
        {"prev_walk", codec.walk(s.prev_walk)},
        {"mtry", s.mtry},
        {"module_edges", codec.edges(s.module_edges)},
        {"tree", nullptr},
        {"best_perf", nullptr},
    };
    if (s.has_tree()) {
      auto [it, fresh] = tree_index.emplace(s.best_tree.get(), trees.size());
      if (fresh) trees.push_back(tree_json(*s.best_tree, codec));
      js["tree"] = it->second;
      js["best_perf"] = s.best_perf;
    }
    slots.push_back(std::move(js));
  }
  json edge_acc = json::array();
  for (const auto& [e, v] : f.edge_acc) {
    edge_acc.push_back(json::array({codec.node(e.a), codec.node(e.b), v}));
  }
  json feature_acc = json::array();
  for (const auto& [ft, v] : f.feature_acc) {
    json entry = codec.feature(ft);
    entry.push_back(v);
    feature_acc.push_back(std::move(entry));
  }
  return json{
      {"format", kBundleFormat},
      {"version", kBundleVersion},
      {"params", params_json(f.params)},
      {"seed", f.seed},
      {"iterations", f.iterations},
      {"node_names", bundle.names.nodes},
      {"modality_names", bundle.names.modalities},
      {"trees", std::move(trees)},
      {"slots", std::move(slots)},
      {"edge_acc", std::move(edge_acc)},
      {"feature_acc", std::move(feature_acc)},
      {"extra", bundle.extra},
  };
}

ForestBundle bundle_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kBundleFormat) {
      throw DataError("not a forest bundle");
    }
    if (j.at("version").get<int>() != kBundleVersion) {
      throw DataError("unsupported bundle version");
    }
    ForestBundle b;
    b.names.nodes = j.at("node_names").get<std::vector<std::string>>();
    b.names.modalities = j.at("modality_names").get<std::vector<std::string>>();
    const Codec codec(b.names);
    FittedForest& f = b.forest;
    f.params = params_of(j.at("params"));
    f.seed = j.at("seed").get<std::uint64_t>();
    f.iterations = j.at("iterations").get<std::size_t>();

    std::vector<std::shared_ptr<const DecisionTree>> trees;
    for (const auto& jt : j.at("trees")) {
      trees.push_back(std::make_shared<DecisionTree>(tree_of(jt, codec)));
    }
    for (const auto& js : j.at("slots")) {
      ForestSlot s;
      s.current_walk = codec.walk_of(js.at("current_walk"));
      s.prev_walk = codec.walk_of(js.at("prev_walk"));
      s.mtry = js.at("mtry").get<std::size_t>();
      s.module_edges = codec.edges_of(js.at("module_edges"));
      if (!js.at("tree").is_null()) {
        const auto idx = js.at("tree").get<std::size_t>();
        if (idx >= trees.size()) throw DataError("bundle: slot tree index out of range");
        s.best_tree = trees[idx];
        s.best_perf = js.at("best_perf").get<double>();
      }
      f.slots.push_back(std::move(s));
    }
    if (f.slots.empty()) throw DataError("bundle has no slots");
    for (const auto& e : j.at("edge_acc")) {
      f.edge_acc.emplace(Edge(codec.node_of(e.at(0)), codec.node_of(e.at(1))),
                         e.at(2).get<double>());
    }
    for (const auto& e : j.at("feature_acc")) {
      f.feature_acc.emplace(codec.feature_of(e), e.at(2).get<double>());
    }
    b.extra = j.value("extra", json::object());
    return b;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed bundle: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed bundle: ") + e.what());
  }
}

void save_bundle(const ForestBundle& bundle, const std::filesystem::path& path) {
  auto out = open_output(path);
  out << bundle_to_json(bundle).dump() << '\n';
  if (!out) throw DataError("cannot write " + path.string());
}

ForestBundle load_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open bundle " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("bundle " + path.string() + " is not valid JSON: " + e.what());
  }
  return bundle_from_json(j);
}

void check_names_match(const NameTable& names, const FeatureGraph& graph) {
  if (names.nodes != graph.node_names()) {
    throw DataError("graph node names do not match the forest bundle");
  }
  if (names.modalities != graph.modality_names()) {
    throw DataError("modality names do not match the forest bundle");
  }
}

std::string module_label(std::span<const NodeId> nodes, const NameTable& names) {
  std::string out;
  for (NodeId n : nodes) {
    if (!out.empty()) out += ';';
    out += names.nodes.at(n);
  }
  return out;
}

void write_modules_tsv(std::ostream& out, std::span<const ModuleReport> ranking,
                       const NameTable& names) {
  out << "rank\tmodule\tsize\tperf\tnorm_edge_imp\timp_m\tmultiplicity\n";
  std::size_t rank = 0;
  for (const ModuleReport& r : ranking) {
    out << ++rank << '\t' << module_label(r.module_nodes, names) << '\t' << r.module_nodes.size()
        << '\t' << format_double(r.perf) << '\t' << format_double(r.norm_edge_imp) << '\t'
        << format_double(r.imp_m) << '\t' << r.multiplicity << '\n';
  }
}

void write_edge_importance_tsv(std::ostream& out, const std::map<Edge, double>& imp,
                               const NameTable& names) {
  out << "node_a\tnode_b\timp_e\n";
  for (const auto& [e, v] : imp) {
    out << names.nodes.at(e.a) << '\t' << names.nodes.at(e.b) << '\t'
        << format_double(v) << '\n';
  }
}

void write_feature_importance_tsv(std::ostream& out, const std::map<FeatureId, double>& imp,
                                  const NameTable& names) {
  out << "node\tmodality\timp_f\n";
  for (const auto& [f, v] : imp) {
    out << names.nodes.at(f.node) << '\t' << names.modalities.at(f.modality) << '\t'
        << format_double(v) << '\n';
  }
}

void write_report_tsv(std::ostream& out, const ClassificationReport& r, double auc) {
  out << "metric\tvalue\n";
  out << "auc\t" << format_double(auc) << '\n';
  out << "sensitivity\t" << format_double(r.sensitivity) << '\n';
  out << "specificity\t" << format_double(r.specificity) << '\n';
  out << "recall\t" << format_double(r.recall) << '\n';
  out << "precision\t" << format_double(r.precision) << '\n';
  out << "accuracy\t" << format_double(r.accuracy) << '\n';
  out << "tp\t" << r.tp << "\nfp\t" << r.fp << "\ntn\t" << r.tn << "\nfn\t" << r.fn << '\n';
}

void write_shap_tsv(std::ostream& out, const ShapExplanation& expl, const NameTable& names) {
  out << "node\tmodality\tshap\n";
  double sum = 0.0;
  for (const auto& [f, v] : expl.attributions) {
    out << names.nodes.at(f.node) << '\t' << names.modalities.at(f.modality) << '\t'
        << format_double(v) << '\n';
    sum += v;
  }
  out << "# baseline\t" << format_double(expl.baseline) << '\n';
  out << "# prediction\t" << format_double(expl.prediction) << '\n';
  out << "# additivity_residual\t" << format_double(expl.prediction - expl.baseline - sum)
      << '\n';
}

void write_svimp_features_tsv(std::ostream& out, const ImportanceSummary& s,
                              const NameTable& names) {
  out << "node\tmodality\tmean_abs_shap\n";
  for (const auto& [f, v] : s.per_feature) {
    out << names.nodes.at(f.node) << '\t' << names.modalities.at(f.modality) << '\t'
        << format_double(v) << '\n';
  }
}

void write_svimp_nodes_tsv(std::ostream& out, const ImportanceSummary& s,
                           const NameTable& names) {
  out << "node\tmean_abs_shap\n";
  for (const auto& [n, v] : s.per_node) {
    out << names.nodes.at(n) << '\t' << format_double(v) << '\n';
  }
}

void write_experiment_long_tsv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << "rep\tniter\ttop1_hit\tunique_modules\tauc\tplanted_rank\tplanted_perf\n";
  for (const ExperimentRecord& r : records) {
    out << r.repetition << '\t' << r.niter << '\t' << (r.top1_hit ? 1 : 0) << '\t'
        << r.unique_modules << '\t' << format_double(r.auc) << '\t' << r.planted_rank << '\t'
        << format_double(r.planted_perf) << '\n';
  }
}

void write_experiment_aggregate_tsv(std::ostream& out,
                                    std::span<const ExperimentAggregate> aggregate) {
  out << "niter\tcoverage\tmedian_unique\tmedian_auc\n";
  for (const ExperimentAggregate& a : aggregate) {
    out << a.niter << '\t' << format_double(a.coverage) << '\t' << format_double(a.median_unique)
        << '\t' << format_double(a.median_auc) << '\n';
  }
}

void write_edge_list(std::ostream& out, const FeatureGraph& graph) {
  for (const Edge& e : graph.edges()) {
    out << graph.node_name(e.a) << '\t' << graph.node_name(e.b) << '\n';
  }
}

void write_modality_matrix(std::ostream& out, const FeatureGraph& graph, ModalityId modality) {
  std::vector<FeatureId> cols;
  for (NodeId n = 0; n < graph.num_nodes(); ++n) {
    if (graph.has_feature({n, modality})) cols.push_back({n, modality});
  }
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "\t" : "") << graph.node_name(cols[i].node);
  }
  out << '\n';
  for (std::size_t s = 0; s < graph.num_samples(); ++s) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      out << (i ? "\t" : "") << format_double(graph.value(cols[i], s));
    }
    out << '\n';
  }
}

void write_labels(std::ostream& out, const FeatureGraph& graph) {
  for (int y : graph.labels()) out << y << '\n';
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace gdf
