// Copyright 2026 The AutoEval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "autoeval/error.hpp"
#include "autoeval/featureset.hpp"
#include "autoeval/harness.hpp"
#include "autoeval/json_util.hpp"
#include "autoeval/metaset.hpp"
#include "autoeval/regress.hpp"
#include "autoeval/represent.hpp"

namespace autoeval::cli {

namespace fs = std::filesystem;
using nlohmann::json;

/// Every setting a subcommand may read. Built-in defaults are overlaid by
/// the --config file and then by flags.
struct ResolvedConfig {
  std::uint64_t seed = 0;
  std::string workspace;
  MetasetConfig metaset;
  RepresentationOptions representation;
  TrainConfig train;
  std::vector<Method> methods = default_roster();
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int random_draws = 5;

  // The top-level seed drives synthesis and regressor initialization.
  void apply_seed() {
    metaset.seed = seed;
    train.seed = seed;
  }

  json to_json() const {
    std::vector<std::string> names;
    for (const auto& m : methods) names.push_back(m.name());
    return {{"seed", seed},
            {"workspace", workspace},
            {"metaset", autoeval::to_json(metaset)},
            {"representation", autoeval::to_json(representation)},
            {"train", autoeval::to_json(train)},
            {"experiment", {{"methods", names}, {"seeds", seeds}, {"random_draws", random_draws}}}};
  }

  void merge_file(const fs::path& path) {
    json j;
    try {
      j = json_util::parse(read_file(path), path.string());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kFormat) fail(ErrorKind::kConfig, e.what());
      throw;
    }
    if (!j.is_object()) fail(ErrorKind::kConfig, "config file must hold a JSON object");
    try {
      for (const auto& [key, val] : j.items()) {
        if (key == "seed") seed = val.get<std::uint64_t>();
        else if (key == "workspace") workspace = val.get<std::string>();
        else if (key == "metaset") merge_json(metaset, val);
        else if (key == "representation") merge_json(representation, val);
        else if (key == "train") merge_json(train, val);
        else if (key == "experiment") {
          for (const auto& [k, v] : val.items())
            if (k != "methods" && k != "seeds" && k != "random_draws")
              fail(ErrorKind::kConfig, "unknown experiment option '" + k + "'");
          ExperimentConfig e;
          e.methods = methods;
          e.seeds = seeds;
          e.random_draws = random_draws;
          merge_json(e, val);
          methods = e.methods;
          seeds = e.seeds;
          random_draws = e.random_draws;
        } else fail(ErrorKind::kConfig, "unknown config section '" + key + "'");
      }
    } catch (const json::exception& e) {
      fail(ErrorKind::kConfig, std::string("config file: ") + e.what());
    }
  }
};

namespace detail {

inline json load_json_file(const std::string& path, ErrorKind parse_kind) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(parse_kind, path + ": " + e.what());
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline fs::path require_workspace(const ResolvedConfig& cfg) {
  if (cfg.workspace.empty()) fail(ErrorKind::kConfig, "--workspace is required");
  return cfg.workspace;
}

inline TrainingPairs pairs_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) fail(ErrorKind::kFormat, what + " must be a non-empty array");
  const std::size_t dim = j[0].contains("representation") ? j[0]["representation"].size() : 0;
  TrainingPairs p{Eigen::MatrixXd(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(dim)),
                  Eigen::VectorXd(static_cast<Eigen::Index>(j.size()))};
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Vector rep = json_util::vector_from_json(json_util::field<json>(j[i], "representation", what), what);
    if (static_cast<std::size_t>(rep.size()) != dim) fail(ErrorKind::kDimension, what + ": representation lengths differ");
    p.inputs.row(static_cast<Eigen::Index>(i)) = rep.transpose();
    p.targets[static_cast<Eigen::Index>(i)] = json_util::field<double>(j[i], "accuracy", what);
  }
  return p;
}

}  // namespace detail

/// Runs one CLI invocation; `args` excludes the program name. Machine-readable
/// results go to `out`, human-readable text (config echo, errors) to `err`.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Label-free accuracy estimation from semi-structured dataset representations", "autoeval"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed_flag;
  std::optional<std::string> workspace_flag;
  std::string config_path;
  app.add_option("--seed", seed_flag, "Seed for synthesis and training");
  app.add_option("--workspace", workspace_flag, "Experiment workspace directory");
  app.add_option("--config", config_path, "JSON config overriding the built-in defaults");

  auto* synth = app.add_subcommand("synth", "Synthesize sample and test sets into a workspace");
  std::optional<int> n_train, n_val, n_test;
  synth->add_option("--n-train", n_train, "Number of TRAIN_META sets");
  synth->add_option("--n-val", n_val, "Number of VAL_META sets");
  synth->add_option("--n-test", n_test, "Number of TEST_META sets");

  auto* extract = app.add_subcommand("extract", "Compute the dataset representation of one feature set");
  std::string ex_input, ex_frame, ex_options, ex_output;
  extract->add_option("--input", ex_input, "FSET file")->required();
  extract->add_option("--frame", ex_frame, "Reference frame JSON (default: <workspace>/frame.json)");
  extract->add_option("--options", ex_options, "Representation options JSON");
  extract->add_option("--output", ex_output, "Representation JSON to write")->required();

  auto* train = app.add_subcommand("train", "Fit the accuracy regressor");
  std::string tr_pairs, tr_val_pairs, tr_method, tr_output;
  train->add_option("--pairs", tr_pairs, "JSON array of {representation, accuracy}");
  train->add_option("--val-pairs", tr_val_pairs, "Validation pairs for checkpointing");
  train->add_option("--method", tr_method, "Build pairs from the workspace with this method");
  train->add_option("--output", tr_output, "Model JSON to write")->required();

  auto* predict = app.add_subcommand("predict", "Estimate accuracy from a representation");
  std::string pr_model, pr_input;
  predict->add_option("--model", pr_model, "Model JSON")->required();
  predict->add_option("--input", pr_input, "Representation JSON (from extract)")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Run the method roster over a workspace");
  std::string ev_methods, ev_seeds, ev_output;
  std::optional<int> ev_draws;
  evaluate->add_option("--methods", ev_methods, "Comma-separated methods, e.g. OURS,FD_ONLY,PRED_SCORE(0.9)");
  evaluate->add_option("--seeds", ev_seeds, "Comma-separated experiment seeds");
  evaluate->add_option("--random-draws", ev_draws, "Draws averaged for OURS_RANDOM_SAMPLER");
  evaluate->add_option("--output", ev_output, "Report directory (default: workspace)");

  auto* ablate = app.add_subcommand("ablate", "Leave-one-out table from a report");
  std::string ab_report, ab_output;
  ablate->add_option("--report", ab_report, "report.json (default: <workspace>/report.json)");
  ablate->add_option("--output", ab_output, "ablation.csv to write (default: next to the report)");

  auto* validate_cmd = app.add_subcommand("validate", "Check an FSET file");
  std::string va_input;
  validate_cmd->add_option("--input", va_input, "FSET file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    ResolvedConfig cfg;
    if (!config_path.empty()) {
      if (!fs::exists(config_path)) fail(ErrorKind::kIo, "config file " + config_path + " not found");
      cfg.merge_file(config_path);
    }
    if (seed_flag) cfg.seed = *seed_flag;
    if (workspace_flag) cfg.workspace = *workspace_flag;
    cfg.apply_seed();
    if (n_train) cfg.metaset.n_train_meta = *n_train;
    if (n_val) cfg.metaset.n_val_meta = *n_val;
    if (n_test) cfg.metaset.n_test_meta = *n_test;
    if (!ev_methods.empty()) {
      cfg.methods.clear();
      for (const auto& m : detail::split_list(ev_methods)) cfg.methods.push_back(parse_method(m));
    }
    if (!ev_seeds.empty()) {
      cfg.seeds.clear();
      for (const auto& s : detail::split_list(ev_seeds)) {
        try {
          cfg.seeds.push_back(std::stoull(s));
        } catch (const std::exception&) {
          fail(ErrorKind::kConfig, "bad seed '" + s + "'");
        }
      }
    }
    if (ev_draws) cfg.random_draws = *ev_draws;
    if (extract->parsed() && !ex_options.empty()) {
      if (!fs::exists(ex_options)) fail(ErrorKind::kIo, "options file " + ex_options + " not found");
      merge_json(cfg.representation, detail::load_json_file(ex_options, ErrorKind::kConfig));
    }
    err << "resolved config: " << cfg.to_json().dump() << "\n";

    if (synth->parsed()) {
      cfg.metaset.check();
      const fs::path ws = detail::require_workspace(cfg);
      const GeneratedMetaset g = synthesize_workspace(cfg.metaset, cfg.representation, ws);
      out << json{{"workspace", ws.string()},
                  {"records", g.manifest.records.size()},
                  {"clean_test_accuracy", g.manifest.clean_test_accuracy}}
                 .dump()
          << "\n";
      return 0;
    }

    if (extract->parsed()) {
      cfg.representation.check();
      fs::path frame_path = ex_frame;
      if (frame_path.empty()) frame_path = detail::require_workspace(cfg) / "frame.json";
      if (!fs::exists(frame_path)) fail(ErrorKind::kIo, "frame file " + frame_path.string() + " not found");
      const ReferenceFrame frame = frame_from_json(json_util::parse(read_file(frame_path), frame_path.string()));
      FeatureSet set = load(ex_input);
      const DatasetRepresentation rep = assemble(set, frame, cfg.representation);
      atomic_write(ex_output, to_json(rep).dump());
      out << json{{"flat_length", rep.flat.size()}}.dump() << "\n";
      return 0;
    }

    if (train->parsed()) {
      std::optional<TrainingPairs> val;
      TrainingPairs pairs;
      if (!tr_pairs.empty()) {
        pairs = detail::pairs_from_json(detail::load_json_file(tr_pairs, ErrorKind::kFormat), tr_pairs);
        if (!tr_val_pairs.empty())
          val = detail::pairs_from_json(detail::load_json_file(tr_val_pairs, ErrorKind::kFormat), tr_val_pairs);
      } else if (!tr_method.empty()) {
        const Method method = parse_method(tr_method);
        if (method.is_threshold()) fail(ErrorKind::kConfig, method.name() + " does not use a regressor");
        WorkspaceData data(detail::require_workspace(cfg), cfg.representation);
        const Eigen::MatrixXd reps = data.representations(method, cfg.seed);
        std::vector<double> truths;
        std::vector<Split> split;
        for (std::size_t i = 0; i < data.size(); ++i) {
          truths.push_back(data.truth(i));
          split.push_back(data.split(i));
        }
        pairs = autoeval::detail::pairs_of(reps, truths, split, Split::kTrainMeta);
        val = autoeval::detail::pairs_of(reps, truths, split, Split::kValMeta);
      } else {
        fail(ErrorKind::kConfig, "train needs --pairs or --method");
      }
      const FitResult fr = fit(pairs, cfg.train, val);
      save_model(fr.model, tr_output);
      out << json{{"input_dim", fr.model.input_dim()},
                  {"best_epoch", fr.best_epoch},
                  {"best_val_loss", fr.val_loss[static_cast<std::size_t>(fr.best_epoch - 1)]}}
                 .dump()
          << "\n";
      return 0;
    }

    if (predict->parsed()) {
      if (!fs::exists(pr_model)) fail(ErrorKind::kIo, "model file " + pr_model + " not found");
      const RegressorModel model = load_model(pr_model);
      const json rep = detail::load_json_file(pr_input, ErrorKind::kFormat);
      const Vector flat =
          json_util::vector_from_json(rep.is_array() ? rep : json_util::field<json>(rep, "flat", pr_input), pr_input);
      out << json{{"prediction", model.predict(flat)}}.dump() << "\n";
      return 0;
    }

    if (evaluate->parsed()) {
      ExperimentConfig ec;
      ec.workspace = detail::require_workspace(cfg);
      ec.representation = cfg.representation;
      ec.methods = cfg.methods;
      ec.train = cfg.train;
      ec.seeds = cfg.seeds;
      ec.random_draws = cfg.random_draws;
      const ExperimentReport report = run_experiment(ec, &err);
      const fs::path dir = ev_output.empty() ? ec.workspace : fs::path(ev_output);
      write_report(report, dir);
      json summary = json::array();
      for (const auto& m : ec.methods)
        summary.push_back({{"method", m.name()}, {"test_rmse_percent", report.mean_rmse(m, Split::kTestMeta)}});
      out << json{{"report", (dir / "report.json").string()}, {"mean_test_rmse", summary}}.dump() << "\n";
      return 0;
    }

    if (ablate->parsed()) {
      fs::path report_path = ab_report;
      if (report_path.empty()) report_path = detail::require_workspace(cfg) / "report.json";
      if (!fs::exists(report_path)) fail(ErrorKind::kIo, "report " + report_path.string() + " not found");
      const ExperimentReport report = report_from_json(json_util::parse(read_file(report_path), report_path.string()));
      const std::string csv = ablation_csv(ablation_table(report));
      atomic_write(ab_output.empty() ? report_path.parent_path() / "ablation.csv" : fs::path(ab_output), csv);
      out << csv;
      return 0;
    }

    if (validate_cmd->parsed()) {
      json violations = json::array();
      try {
        const FeatureSet set = load(va_input, /*check=*/false);
        for (const auto& v : validate(set))
          violations.push_back({{"field", v.field}, {"row", v.row}, {"rule", v.rule}});
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kFormat) throw;
        violations.push_back({{"field", "file"}, {"row", -1}, {"rule", e.what()}});
      }
      out << json{{"valid", violations.empty()}, {"violations", violations}}.dump() << "\n";
      for (const auto& v : violations) err << "violation: " << v.dump() << "\n";
      return violations.empty() ? 0 : 4;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace autoeval::cli
