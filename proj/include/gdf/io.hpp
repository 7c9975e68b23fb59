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

#ifndef GDF_IO_HPP_
#define GDF_IO_HPP_

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gdf/common.hpp"
#include "gdf/forest.hpp"
#include "gdf/importance.hpp"
#include "gdf/shap.hpp"
#include "gdf/synth.hpp"
#include "gdf/tree.hpp"

namespace gdf {

// Node and modality names that give ids a meaning outside one process.
struct NameTable {
  std::vector<std::string> nodes;
  std::vector<std::string> modalities;

  static NameTable of(const FeatureGraph& graph) {
    return {graph.node_names(), graph.modality_names()};
  }
};

// Option spellings shared by the bundle format and the command line.
std::string_view to_string(AcceptRule rule);
std::string_view to_string(RevertProposal proposal);
std::string_view to_string(ModuleEdgeMode mode);
std::string_view to_string(SplitCandidates candidates);
std::string_view to_string(ModalMode mode);
// Reverse mappings; throw std::invalid_argument on unknown names.
AcceptRule parse_accept_rule(std::string_view name);
RevertProposal parse_revert_proposal(std::string_view name);
ModuleEdgeMode parse_module_edge_mode(std::string_view name);
SplitCandidates parse_split_candidates(std::string_view name);
ModalMode parse_modal_mode(std::string_view name);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Nested node objects; features, nodes and edges are written by name.
nlohmann::json tree_to_json(const DecisionTree& tree, const NameTable& names);
// Throws DataError on malformed input or names missing from `names`.
DecisionTree tree_from_json(const nlohmann::json& j, const NameTable& names);

// Saved state of a fitted forest; accumulators and trees are keyed by name. `extra` carries whatever the caller wants
// to keep alongside (resolved run options, split indices).
struct ForestBundle {
  FittedForest forest;
  NameTable names;
  nlohmann::json extra = nlohmann::json::object();
};

nlohmann::json bundle_to_json(const ForestBundle& bundle);
// Throws DataError on anything that does not describe a valid forest.
ForestBundle bundle_from_json(const nlohmann::json& j);
void save_bundle(const ForestBundle& bundle, const std::filesystem::path& path);
ForestBundle load_bundle(const std::filesystem::path& path);

// Fails with DataError when the graph's node or modality names differ from
// the bundle's, since ids would then point at different columns.
void check_names_match(const NameTable& names, const FeatureGraph& graph);

std::string module_label(std::span<const NodeId> nodes, const NameTable& names);

void write_modules_tsv(std::ostream& out, std::span<const ModuleReport> ranking,
                       const NameTable& names);
void write_edge_importance_tsv(std::ostream& out, const std::map<Edge, double>& imp,
                               const NameTable& names);
void write_feature_importance_tsv(std::ostream& out, const std::map<FeatureId, double>& imp,
                                  const NameTable& names);
void write_report_tsv(std::ostream& out, const ClassificationReport& report, double auc);
// Per-feature attributions followed by '#' footer lines with the baseline,
// the prediction and the additivity residual.
void write_shap_tsv(std::ostream& out, const ShapExplanation& expl, const NameTable& names);
void write_svimp_features_tsv(std::ostream& out, const ImportanceSummary& summary,
                              const NameTable& names);
void write_svimp_nodes_tsv(std::ostream& out, const ImportanceSummary& summary,
                           const NameTable& names);
void write_experiment_long_tsv(std::ostream& out, std::span<const ExperimentRecord> records);
void write_experiment_aggregate_tsv(std::ostream& out,
                                    std::span<const ExperimentAggregate> aggregate);

// Edge list, one matrix per modality (samples x nodes) and labels, in the
// formats the loaders read back.
void write_edge_list(std::ostream& out, const FeatureGraph& graph);
void write_modality_matrix(std::ostream& out, const FeatureGraph& graph, ModalityId modality);
void write_labels(std::ostream& out, const FeatureGraph& graph);

// Opens `path` for writing or throws DataError.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace gdf

#endif  // GDF_IO_HPP_
