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

// gdf: command-line front end.
//
//   gdf simulate   --out DIR            planted XOR scenario on a Barabasi graph
//   gdf fit        --edges --modality NAME=PATH --labels --out DIR
//   gdf rank       --bundle forest.json --out DIR
//   gdf explain    --bundle forest.json (--row N | --all) --out DIR
//   gdf experiment --out DIR            coverage over repetitions and niter
//
// --config FILE (TOML/INI, flags win) may appear before or after the
// subcommand; options live in a section named after it. Every subcommand
// writes a config.toml manifest into its output directory.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gdf/common.hpp"
#include "gdf/forest.hpp"
#include "gdf/graph.hpp"
#include "gdf/importance.hpp"
#include "gdf/io.hpp"
#include "gdf/shap.hpp"
#include "gdf/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Options that do not change results and stay out of the manifest.
const std::vector<std::string> kRuntimeOnly = {"out", "threads", "config", "quiet"};

struct TreeOptions {
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;
  double min_gain = 1e-12;
  std::string split_candidates = "all";

  gdf::TreeParams params() const {
    gdf::TreeParams p;
    p.min_leaf = min_leaf;
    if (max_depth > 0) p.max_depth = max_depth;
    p.min_gain = min_gain;
    p.split_candidates = gdf::parse_split_candidates(split_candidates);
    return p;
  }
};

struct GreedyOptions {
  std::size_t ntree = 100;
  std::size_t mtry0 = 0;
  std::size_t mtry_floor = 2;
  std::string accept = "non-decreasing";
  std::string revert = "fresh-walk";
  std::string module_edges = "traversed";
  int threads = 0;
  TreeOptions tree;
};

struct SimulateOptions {
  std::size_t nodes = 30;
  double power = 1.2;
  std::size_t edges_per_step = 1;
  std::size_t samples = 1000;
  std::string modal = "single";
  std::uint64_t seed = 1;
  std::string out;
};

struct FitOptions {
  std::string edges;
  std::vector<std::string> modalities;
  std::string labels;
  std::string out;
  std::size_t niter = 100;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  bool quiet = false;
  GreedyOptions greedy;
};

struct RankOptions {
  std::string bundle;
  std::string out;
};

struct ExplainOptions {
  std::string bundle;
  std::string out;
  std::string edges;
  std::vector<std::string> modalities;
  std::vector<std::size_t> rows;
  bool all = false;
};

struct ExperimentOptions {
  std::size_t nodes = 50;
  double power = 1.2;
  std::size_t edges_per_step = 1;
  std::vector<std::size_t> niter_grid{10, 25, 50, 100, 200};
  std::size_t repetitions = 20;
  bool vary_topology = false;
  std::string modal = "single";
  std::size_t samples = 1000;
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
  bool quiet = false;
  std::string out;
  GreedyOptions greedy;
};

void add_tree_options(CLI::App* app, TreeOptions& o) {
  app->add_option("--min-leaf", o.min_leaf, "Minimum bootstrap samples per leaf")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--max-depth", o.max_depth, "Maximum tree depth, 0 for unlimited")
      ->capture_default_str();
  app->add_option("--min-gain", o.min_gain, "Smallest Gini gain that creates a split")
      ->capture_default_str();
  app->add_option("--split-candidates", o.split_candidates, "Features tried per split")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "sqrt"}));
}

void add_greedy_options(CLI::App* app, GreedyOptions& o) {
  app->add_option("--ntree", o.ntree, "Number of tree slots")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--mtry0", o.mtry0, "Initial walk size, 0 for ceil(sqrt(#nodes))")
      ->capture_default_str();
  app->add_option("--mtry-floor", o.mtry_floor, "Smallest walk size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--accept", o.accept, "When a candidate tree replaces the best one")
      ->capture_default_str()
      ->check(CLI::IsMember({"strict", "non-decreasing", "smaller-on-tie"}));
  app->add_option("--revert", o.revert, "Proposal after a rejected candidate")
      ->capture_default_str()
      ->check(CLI::IsMember({"previous-walk", "fresh-walk"}));
  app->add_option("--module-edges", o.module_edges, "Edges credited to a module")
      ->capture_default_str()
      ->check(CLI::IsMember({"traversed", "induced"}));
  app->add_option("--threads", o.threads, "Worker threads, 0 for all cores")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  add_tree_options(app, o.tree);
}

gdf::ForestParams forest_params(const GreedyOptions& o, std::size_t niter) {
  gdf::ForestParams p;
  p.ntree = o.ntree;
  p.niter = niter;
  p.mtry0 = o.mtry0;
  p.mtry_floor = o.mtry_floor;
  p.tree = o.tree.params();
  p.module_edges = gdf::parse_module_edge_mode(o.module_edges);
  p.accept = gdf::parse_accept_rule(o.accept);
  p.revert = gdf::parse_revert_proposal(o.revert);
  p.threads = o.threads;
  return p;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

void flush_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) warn(w);
}

void prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw gdf::DataError("cannot create output directory " + out);
}

// Resolved options of the invoked subcommand in config-file syntax,
// runtime-only keys dropped. Usable again through --config.
void write_manifest(const CLI::App* app, const std::string& out) {
  std::istringstream all(app->get_parent()->config_to_str(true, false));
  auto file = gdf::open_output(fs::path(out) / "config.toml");
  file << "# resolved options of 'gdf " << app->get_name() << "'\n";
  const std::string prefix = app->get_name() + ".";
  std::string line;
  while (std::getline(all, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos || line.rfind(prefix, 0) != 0) continue;
    std::string key = line.substr(prefix.size(), eq - prefix.size());
    while (!key.empty() && key.back() == ' ') key.pop_back();
    if (std::find(kRuntimeOnly.begin(), kRuntimeOnly.end(), key) != kRuntimeOnly.end()) continue;
    file << line << '\n';
  }
}

struct ModalityPath {
  std::string name;
  std::string path;
};

std::vector<ModalityPath> parse_modalities(const std::vector<std::string>& specs) {
  std::vector<ModalityPath> out;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw std::invalid_argument("--modality expects NAME=PATH, got '" + spec + "'");
    }
    out.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
  }
  return out;
}

std::string absolute_string(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

gdf::FeatureGraph load_data(const std::string& edges, const std::vector<ModalityPath>& modalities,
                            const std::string* labels) {
  std::vector<std::string> warnings;
  gdf::FeatureGraph graph = gdf::load_graph(fs::path(edges), &warnings);
  for (const auto& m : modalities) gdf::attach_modality(graph, m.name, fs::path(m.path), &warnings);
  if (labels) gdf::attach_labels(graph, fs::path(*labels));
  flush_warnings(warnings);
  return graph;
}

void write_rankings(const gdf::FittedForest& forest, const gdf::NameTable& names,
                    const std::string& out) {
  const auto ranking = gdf::rank_modules(forest);
  {
    auto f = gdf::open_output(fs::path(out) / "modules.tsv");
    gdf::write_modules_tsv(f, ranking, names);
  }
  {
    auto f = gdf::open_output(fs::path(out) / "edge_importance.tsv");
    gdf::write_edge_importance_tsv(f, gdf::edge_importance(forest), names);
  }
  {
    auto f = gdf::open_output(fs::path(out) / "feature_importance.tsv");
    gdf::write_feature_importance_tsv(f, gdf::feature_importance(forest), names);
  }
  auto f = gdf::open_output(fs::path(out) / "module_features.tsv");
  f << "rank\tmodule\tnode\tmodality\timp_f\n";
  std::size_t rank = 0;
  for (const auto& r : ranking) {
    ++rank;
    const std::string label = gdf::module_label(r.module_nodes, names);
    for (const auto& [feat, v] : r.feature_imps) {
      f << rank << '\t' << label << '\t' << names.nodes.at(feat.node) << '\t'
        << names.modalities.at(feat.modality) << '\t' << gdf::format_double(v) << '\n';
    }
  }
}

int cmd_simulate(const CLI::App* app, const SimulateOptions& o) {
  if (o.nodes < 4) throw std::invalid_argument("--nodes must be >= 4");
  const gdf::ModalMode mode = gdf::parse_modal_mode(o.modal);
  prepare_out_dir(o.out);
  const auto skeleton = gdf::generate_barabasi(o.nodes, o.power, o.edges_per_step,
                                               gdf::derive_seed(o.seed, gdf::Stream::kGraph));
  const auto sc = gdf::plant_xor(skeleton, gdf::derive_seed(o.seed, gdf::Stream::kScenario), mode,
                                 o.samples);
  const fs::path out(o.out);
  {
    auto f = gdf::open_output(out / "edges.tsv");
    gdf::write_edge_list(f, sc.graph);
  }
  for (gdf::ModalityId m = 0; m < sc.graph.num_modalities(); ++m) {
    auto f = gdf::open_output(out / ("modality_" + sc.graph.modality_name(m) + ".tsv"));
    gdf::write_modality_matrix(f, sc.graph, m);
  }
  {
    auto f = gdf::open_output(out / "labels.txt");
    gdf::write_labels(f, sc.graph);
  }
  json planted{{"mode", gdf::to_string(mode)}, {"nodes", json::array()}, {"features", json::array()}};
  for (gdf::NodeId n : sc.planted) planted["nodes"].push_back(sc.graph.node_name(n));
  for (const auto& f : sc.planted_features()) {
    planted["features"].push_back(
        json::array({sc.graph.node_name(f.node), sc.graph.modality_name(f.modality)}));
  }
  {
    auto f = gdf::open_output(out / "planted.json");
    f << planted.dump(2) << '\n';
  }
  write_manifest(app, o.out);
  return kExitOk;
}

int cmd_fit(const CLI::App* app, const FitOptions& o) {
  const auto modalities = parse_modalities(o.modalities);
  const gdf::ForestParams params = forest_params(o.greedy, o.niter);
  if (o.niter < 1) throw std::invalid_argument("niter must be >= 1");
  if (!(o.train_fraction > 0.0 && o.train_fraction <= 1.0)) {
    throw std::invalid_argument("--train-fraction must be in (0, 1]");
  }
  const gdf::FeatureGraph graph = load_data(o.edges, modalities, &o.labels);
  prepare_out_dir(o.out);

  const auto split = gdf::stratified_split(graph.labels(), o.train_fraction,
                                           gdf::derive_seed(o.seed, gdf::Stream::kSplit));
  if (split.test.empty()) warn("no test samples; the test report is skipped");

  auto state = gdf::init_forest(graph, split.train, params,
                                gdf::derive_seed(o.seed, gdf::Stream::kForest));
  const auto forest = gdf::run(state, [&](const gdf::GreedyForestState& s, const gdf::StepStats& st) {
    if (o.quiet) return;
    std::fprintf(stderr, "iter %zu/%zu accepted %zu reverted %zu modules %zu\n", s.forest.iterations,
                 params.niter, st.accepted, st.reverted, gdf::unique_module_count(s.forest));
  });

  gdf::ForestBundle bundle{forest, gdf::NameTable::of(graph), json::object()};
  json data{{"edges", absolute_string(o.edges)}, {"modalities", json::array()},
            {"labels", absolute_string(o.labels)}};
  for (const auto& m : modalities) {
    data["modalities"].push_back(json{{"name", m.name}, {"path", absolute_string(m.path)}});
  }
  bundle.extra["data"] = data;
  bundle.extra["root_seed"] = o.seed;
  bundle.extra["split"] = json{
      {"train_fraction", o.train_fraction}, {"train", split.train}, {"test", split.test}};
  gdf::save_bundle(bundle, fs::path(o.out) / "forest.json");
  write_rankings(forest, bundle.names, o.out);

  if (!split.test.empty()) {
    const auto scores = gdf::forest_predict(forest, graph, split.test);
    std::vector<int> labels;
    for (std::size_t i : split.test) labels.push_back(graph.labels()[i]);
    const auto report = gdf::classification_report(scores, labels);
    const auto auc = gdf::roc_auc(scores, labels);
    auto f = gdf::open_output(fs::path(o.out) / "report.tsv");
    gdf::write_report_tsv(f, report, auc.value_or(0.5));
  }
  write_manifest(app, o.out);
  return kExitOk;
}

int cmd_rank(const RankOptions& o) {
  const auto bundle = gdf::load_bundle(o.bundle);
  prepare_out_dir(o.out);
  write_rankings(bundle.forest, bundle.names, o.out);
  return kExitOk;
}

int cmd_explain(const CLI::App* app, const ExplainOptions& o) {
  if (o.rows.empty() && !o.all) throw std::invalid_argument("explain needs --row or --all");
  const auto bundle = gdf::load_bundle(o.bundle);
  const json& data = bundle.extra.contains("data") ? bundle.extra["data"] : json::object();
  std::string edges = o.edges;
  std::vector<ModalityPath> modalities = parse_modalities(o.modalities);
  try {
    if (edges.empty()) edges = data.at("edges").get<std::string>();
    if (modalities.empty()) {
      for (const auto& m : data.at("modalities")) {
        modalities.push_back({m.at("name").get<std::string>(), m.at("path").get<std::string>()});
      }
    }
  } catch (const json::exception&) {
    throw std::invalid_argument("bundle records no data paths; pass --edges and --modality");
  }
  const gdf::FeatureGraph graph = load_data(edges, modalities, nullptr);
  gdf::check_names_match(bundle.names, graph);
  for (std::size_t r : o.rows) {
    if (r >= graph.num_samples()) {
      throw std::invalid_argument("--row " + std::to_string(r) + " out of range (" +
                                  std::to_string(graph.num_samples()) + " samples)");
    }
  }
  prepare_out_dir(o.out);
  for (std::size_t r : o.rows) {
    const auto expl = gdf::forest_shap(bundle.forest, gdf::graph_row(graph, r));
    auto f = gdf::open_output(fs::path(o.out) / ("shap_row_" + std::to_string(r) + ".tsv"));
    gdf::write_shap_tsv(f, expl, bundle.names);
  }
  if (o.all) {
    std::vector<std::size_t> samples;
    if (bundle.extra.contains("split")) {
      samples = bundle.extra["split"].value("test", std::vector<std::size_t>{});
    }
    if (samples.empty()) {
      for (std::size_t s = 0; s < graph.num_samples(); ++s) samples.push_back(s);
    }
    for (std::size_t s : samples) {
      if (s >= graph.num_samples()) throw gdf::DataError("bundle test index out of range");
    }
    const auto summary = gdf::svimp(bundle.forest, graph, samples);
    {
      auto f = gdf::open_output(fs::path(o.out) / "svimp_features.tsv");
      gdf::write_svimp_features_tsv(f, summary, bundle.names);
    }
    auto f = gdf::open_output(fs::path(o.out) / "svimp_nodes.tsv");
    gdf::write_svimp_nodes_tsv(f, summary, bundle.names);
  }
  write_manifest(app, o.out);
  return kExitOk;
}

int cmd_experiment(const CLI::App* app, const ExperimentOptions& o) {
  if (o.niter_grid.empty()) throw std::invalid_argument("--niter-grid must not be empty");
  if (o.nodes < 4) throw std::invalid_argument("--nodes must be >= 4");
  gdf::ExperimentConfig c;
  c.n_nodes = o.nodes;
  c.power = o.power;
  c.edges_per_step = o.edges_per_step;
  c.niter_grid = o.niter_grid;
  c.ntree = o.greedy.ntree;
  c.repetitions = o.repetitions;
  c.vary_topology = o.vary_topology;
  c.modal = gdf::parse_modal_mode(o.modal);
  c.n_samples = o.samples;
  c.train_fraction = o.train_fraction;
  c.seed = o.seed;
  c.tree = o.greedy.tree.params();
  c.accept_rule = gdf::parse_accept_rule(o.greedy.accept);
  c.revert = gdf::parse_revert_proposal(o.greedy.revert);
  c.threads = o.greedy.threads;
  prepare_out_dir(o.out);
  const auto result = gdf::coverage_experiment(c, [&](const gdf::RepetitionOutcome& rep) {
    if (o.quiet || rep.records.empty()) return;
    const auto& last = rep.records.back();
    std::fprintf(stderr, "rep %zu niter %zu top1_hit %d unique %zu auc %.4f\n", last.repetition,
                 last.niter, last.top1_hit ? 1 : 0, last.unique_modules, last.auc);
  });
  {
    auto f = gdf::open_output(fs::path(o.out) / "experiment_long.tsv");
    gdf::write_experiment_long_tsv(f, result.records);
  }
  {
    auto f = gdf::open_output(fs::path(o.out) / "experiment_aggregate.tsv");
    gdf::write_experiment_aggregate_tsv(f, result.aggregate());
  }
  write_manifest(app, o.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy decision forest for network module detection"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI option file, one [section] per subcommand");
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Write a planted XOR scenario");
  simulate->fallthrough();
  simulate->add_option("--nodes", sim.nodes, "Graph size")->capture_default_str();
  simulate->add_option("--power", sim.power, "Preferential attachment power")
      ->capture_default_str();
  simulate->add_option("--edges-per-step", sim.edges_per_step, "Edges added per new node")
      ->capture_default_str();
  simulate->add_option("--samples", sim.samples, "Number of samples")->capture_default_str();
  simulate->add_option("--modal", sim.modal, "single or multi")
      ->capture_default_str()
      ->check(CLI::IsMember({"single", "multi"}));
  simulate->add_option("--seed", sim.seed, "Root seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "Output directory")->required();

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Train a greedy forest and rank modules");
  fit_cmd->fallthrough();
  fit_cmd->add_option("--edges", fit.edges, "Edge list")->required();
  fit_cmd->add_option("--modality", fit.modalities, "NAME=PATH feature matrix, repeatable")
      ->required();
  fit_cmd->add_option("--labels", fit.labels, "0/1 labels, one per line")->required();
  fit_cmd->add_option("--out", fit.out, "Output directory")->required();
  fit_cmd->add_option("--niter", fit.niter, "Greedy iterations")->capture_default_str();
  fit_cmd->add_option("--train-fraction", fit.train_fraction, "Stratified train share")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Root seed")->capture_default_str();
  fit_cmd->add_flag("--quiet", fit.quiet, "No per-iteration log");
  add_greedy_options(fit_cmd, fit.greedy);

  RankOptions rank;
  auto* rank_cmd = app.add_subcommand("rank", "Rank modules of a saved forest");
  rank_cmd->fallthrough();
  rank_cmd->add_option("--bundle", rank.bundle, "forest.json written by fit")->required();
  rank_cmd->add_option("--out", rank.out, "Output directory")->required();

  ExplainOptions expl;
  auto* explain = app.add_subcommand("explain", "Shapley explanations of a saved forest");
  explain->fallthrough();
  explain->add_option("--bundle", expl.bundle, "forest.json written by fit")->required();
  explain->add_option("--out", expl.out, "Output directory")->required();
  explain->add_option("--edges", expl.edges, "Edge list, defaults to the bundle's");
  explain->add_option("--modality", expl.modalities, "NAME=PATH, defaults to the bundle's");
  explain->add_option("--row", expl.rows, "Sample index to explain, repeatable");
  explain->add_flag("--all", expl.all, "Importance summary over the test split");

  ExperimentOptions exp;
  auto* experiment = app.add_subcommand("experiment", "Coverage of the planted module");
  experiment->fallthrough();
  experiment->add_option("--nodes", exp.nodes, "Graph size")->capture_default_str();
  experiment->add_option("--power", exp.power, "Preferential attachment power")
      ->capture_default_str();
  experiment->add_option("--edges-per-step", exp.edges_per_step, "Edges added per new node")
      ->capture_default_str();
  experiment->add_option("--niter-grid", exp.niter_grid, "Iteration counts to record")
      ->delimiter(',')
      ->capture_default_str();
  experiment->add_option("--reps", exp.repetitions, "Repetitions")->capture_default_str();
  experiment->add_flag("--vary-topology", exp.vary_topology, "Fresh graph per repetition");
  experiment->add_option("--modal", exp.modal, "single or multi")
      ->capture_default_str()
      ->check(CLI::IsMember({"single", "multi"}));
  experiment->add_option("--samples", exp.samples, "Samples per scenario")->capture_default_str();
  experiment->add_option("--train-fraction", exp.train_fraction, "Stratified train share")
      ->capture_default_str();
  experiment->add_option("--seed", exp.seed, "Root seed")->capture_default_str();
  experiment->add_option("--out", exp.out, "Output directory")->required();
  experiment->add_flag("--quiet", exp.quiet, "No per-repetition log");
  add_greedy_options(experiment, exp.greedy);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(simulate, sim);
    if (fit_cmd->parsed()) return cmd_fit(fit_cmd, fit);
    if (rank_cmd->parsed()) return cmd_rank(rank);
    if (explain->parsed()) return cmd_explain(explain, expl);
    if (experiment->parsed()) return cmd_experiment(experiment, exp);
  } catch (const gdf::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}
