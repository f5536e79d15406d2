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

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "autoeval/autoeval.hpp"
#include "autoeval/cli.hpp"
#include "test_util.hpp"

namespace autoeval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::TempDir;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json echoed_config(const std::string& err) {
  const std::string tag = "resolved config: ";
  const auto at = err.find(tag);
  if (at == std::string::npos) return nullptr;
  const auto end = err.find('\n', at);
  return json::parse(err.substr(at + tag.size(), end - at - tag.size()));
}

const json kSmallConfig = {
    {"seed", 5},
    {"metaset",
     {{"task", {{"raw_dim", 8}, {"classes", 4}, {"separation", 8.0}, {"n_train", 1000}, {"n_test", 300}}},
      {"classifier", {{"hidden", 16}, {"epochs", 30}}},
      {"n_train_meta", 12},
      {"n_val_meta", 4},
      {"n_test_meta", 4}}},
    {"representation", {{"bins", 8}, {"samples", 20}}},
    {"train", {{"hidden", {16, 8}}, {"epochs", 4}}},
    {"experiment", {{"seeds", {0}}, {"random_draws", 2}}}};

fs::path write_config(const fs::path& dir, const json& j = kSmallConfig) {
  const fs::path p = dir / "config.json";
  atomic_write(p, j.dump());
  return p;
}

// A small synthesized workspace shared by the suite.
const fs::path& workspace() {
  static const fs::path ws = [] {
    const fs::path root = fs::temp_directory_path() / "autoeval_cli_ws";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg = write_config(root);
    const Outcome o = run_cli({"--config", cfg.string(), "--workspace", (root / "ws").string(), "synth"});
    EXPECT_EQ(o.code, 0) << o.err;
    return root / "ws";
  }();
  return ws;
}

fs::path config_path() { return workspace().parent_path() / "config.json"; }

TEST(Cli, SynthReportsWorkspace) {
  const Manifest m = load_manifest(workspace());
  EXPECT_EQ(m.records.size(), 20u);
  EXPECT_EQ(m.seed, 5u);
  EXPECT_TRUE(fs::exists(workspace() / "frame.json"));
}

TEST(Cli, SynthSameSeedSameManifest) {
  TempDir dir;
  const Outcome o = run_cli({"--config", config_path().string(), "--workspace", (dir / "ws").string(), "synth"});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json::parse(o.out)["records"], 20);
  EXPECT_EQ(read_file(dir / "ws/manifest.json"), read_file(workspace() / "manifest.json"));
}

TEST(Cli, SynthRejectsZeroCount) {
  TempDir dir;
  const Outcome o = run_cli({"--config", config_path().string(), "--workspace", (dir / "ws").string(), "synth",
                             "--n-train", "0"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("n-train must be ≥ 1"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "ws/manifest.json"));
}

TEST(Cli, ConfigMergeOrder) {
  TempDir dir;
  json j = kSmallConfig;
  j["workspace"] = (dir / "from_file").string();
  const fs::path cfg = write_config(dir.path(), j);
  // Defaults only.
  Outcome o = run_cli({"validate", "--input", (dir / "missing.fset").string()});
  json echo = echoed_config(o.err);
  EXPECT_EQ(echo["seed"], 0);
  EXPECT_EQ(echo["representation"]["bins"], 30);
  // File over defaults.
  o = run_cli({"--config", cfg.string(), "validate", "--input", (dir / "missing.fset").string()});
  echo = echoed_config(o.err);
  EXPECT_EQ(echo["seed"], 5);
  EXPECT_EQ(echo["metaset"]["seed"], 5);
  EXPECT_EQ(echo["workspace"], (dir / "from_file").string());
  EXPECT_EQ(echo["representation"]["bins"], 8);
  EXPECT_EQ(echo["representation"]["kmeans_tol"], 1e-6);
  // Flags over file.
  o = run_cli({"--config", cfg.string(), "--seed", "9", "--workspace", "elsewhere", "evaluate", "--seeds", "3,4",
               "--methods", "PRED_SCORE(0.8),AC_ONLY"});
  echo = echoed_config(o.err);
  EXPECT_EQ(echo["seed"], 9);
  EXPECT_EQ(echo["train"]["seed"], 9);
  EXPECT_EQ(echo["workspace"], "elsewhere");
  EXPECT_EQ(echo["experiment"]["seeds"], json({3, 4}));
  EXPECT_EQ(echo["experiment"]["methods"], json({"PRED_SCORE(0.8)", "AC_ONLY"}));
  EXPECT_EQ(echo["experiment"]["random_draws"], 2);
}

TEST(Cli, ConfigErrors) {
  TempDir dir;
  json j = kSmallConfig;
  j["experiment"]["workspace"] = "x";
  EXPECT_EQ(run_cli({"--config", write_config(dir.path(), j).string(), "synth"}).code, 2);
  j = kSmallConfig;
  j["represntation"] = json::object();
  EXPECT_EQ(run_cli({"--config", write_config(dir.path(), j).string(), "synth"}).code, 2);
  atomic_write(dir / "broken.json", "{\"seed\": ");
  EXPECT_EQ(run_cli({"--config", (dir / "broken.json").string(), "synth"}).code, 2);
  EXPECT_EQ(run_cli({"--config", (dir / "absent.json").string(), "synth"}).code, 3);
  EXPECT_EQ(run_cli({"synth"}).code, 2);  // no workspace
  EXPECT_EQ(run_cli({"--workspace", workspace().string(), "evaluate", "--methods", "NOPE"}).code, 2);
}

TEST(Cli, ParseErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"synth", "--bogus"}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  const Outcome help = run_cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("evaluate"), std::string::npos);
}

TEST(Cli, ExtractThenPredict) {
  TempDir dir;
  const fs::path set = workspace() / record_file_name(0);
  Outcome o = run_cli({"--config", config_path().string(), "--workspace", workspace().string(), "extract", "--input",
                       set.string(), "--output", (dir / "rep.json").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  // B=8, K=4 classes, S=20.
  const FeatureSet fs_set = load(set);
  const long d = static_cast<long>(fs_set.dims());
  EXPECT_EQ(json::parse(o.out)["flat_length"], d * 8 + 4 * d + 20 * d);

  const json rep = json::parse(read_file(dir / "rep.json"));
  ASSERT_EQ(rep["flat"].size(), static_cast<std::size_t>(d * 8 + 4 * d + 20 * d));

  // A regressor with the matching width predicts in (0,1); a narrower one fails.
  TrainConfig tc;
  tc.hidden = {4};
  tc.epochs = 1;
  TrainingPairs pairs{Eigen::MatrixXd::Random(4, static_cast<Eigen::Index>(rep["flat"].size())),
                      Eigen::VectorXd::Constant(4, 0.5)};
  save_model(fit(pairs, tc).model, dir / "model.json");
  o = run_cli({"predict", "--model", (dir / "model.json").string(), "--input", (dir / "rep.json").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const double p = json::parse(o.out)["prediction"];
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1.0);

  TrainingPairs narrow{Eigen::MatrixXd::Random(4, 3), Eigen::VectorXd::Constant(4, 0.5)};
  save_model(fit(narrow, tc).model, dir / "narrow.json");
  o = run_cli({"predict", "--model", (dir / "narrow.json").string(), "--input", (dir / "rep.json").string()});
  EXPECT_EQ(o.code, 4);
  EXPECT_EQ(run_cli({"predict", "--model", (dir / "none.json").string(), "--input", (dir / "rep.json").string()}).code,
            3);
}

TEST(Cli, ExtractErrors) {
  TempDir dir;
  const fs::path set = workspace() / record_file_name(0);
  atomic_write(dir / "opts.json", json{{"samples", 100000}}.dump());
  Outcome o = run_cli({"--workspace", workspace().string(), "extract", "--input", set.string(), "--options",
                       (dir / "opts.json").string(), "--output", (dir / "rep.json").string()});
  EXPECT_EQ(o.code, 4);
  EXPECT_NE(o.err.find("N < S"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "rep.json"));

  o = run_cli({"extract", "--input", set.string(), "--frame", (dir / "nope.json").string(), "--output",
               (dir / "rep.json").string()});
  EXPECT_EQ(o.code, 3);
}

TEST(Cli, Validate) {
  TempDir dir;
  const fs::path set = workspace() / record_file_name(1);
  Outcome o = run_cli({"validate", "--input", set.string()});
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(json::parse(o.out)["valid"], true);

  std::string bytes = read_file(set);
  bytes.resize(bytes.size() - 3);
  atomic_write(dir / "cut.fset", bytes);
  o = run_cli({"validate", "--input", (dir / "cut.fset").string()});
  EXPECT_EQ(o.code, 4);
  EXPECT_EQ(json::parse(o.out)["valid"], false);

  // Overwrite softmax entry (2, 0) with 0.9f so row 2 no longer sums to 1.
  const FeatureSet good = load(set);
  const std::size_t at = detail::kFsetHeaderBytes + 4 * static_cast<std::size_t>(good.features.size() + 2 * good.num_classes);
  const float tampered = 0.9f;
  std::string patched = read_file(set);
  std::memcpy(patched.data() + at, &tampered, 4);
  atomic_write(dir / "bad.fset", patched);
  o = run_cli({"validate", "--input", (dir / "bad.fset").string()});
  EXPECT_EQ(o.code, 4);
  const json v = json::parse(o.out)["violations"];
  ASSERT_FALSE(v.empty());
  EXPECT_EQ(v[0]["row"], 2);

  EXPECT_EQ(run_cli({"validate", "--input", (dir / "absent.fset").string()}).code, 3);
}

TEST(Cli, EvaluateTrainAndAblate) {
  TempDir dir;
  const std::vector<std::string> base = {"--config", config_path().string(), "--workspace", workspace().string()};
  auto with = [&](std::vector<std::string> tail) {
    std::vector<std::string> a = base;
    a.insert(a.end(), tail.begin(), tail.end());
    return a;
  };
  Outcome o = run_cli(with({"evaluate", "--methods",
                            "OURS,OURS_MINUS_SHAPE,OURS_MINUS_CLUSTER,OURS_MINUS_SAMPLE,PRED_SCORE(0.9)", "--seeds",
                            "0,1", "--output", (dir / "r").string()}));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.err.find("seed 1 PRED_SCORE(0.9)"), std::string::npos);
  const std::string csv = read_file(dir / "r/report.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 5 * 3 * 2);
  EXPECT_TRUE(fs::exists(dir / "r/ablation.csv"));
  EXPECT_EQ(json::parse(o.out)["mean_test_rmse"].size(), 5u);

  o = run_cli({"ablate", "--report", (dir / "r/report.json").string(), "--output", (dir / "abl.csv").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(o.out, read_file(dir / "r/ablation.csv"));
  EXPECT_EQ(read_file(dir / "abl.csv"), o.out);

  o = run_cli(with({"train", "--method", "FD_ONLY", "--output", (dir / "fd.json").string()}));
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json::parse(o.out)["input_dim"], 1);
  EXPECT_EQ(run_cli(with({"train", "--method", "PRED_SCORE(0.9)", "--output", (dir / "x.json").string()})).code, 2);
  EXPECT_EQ(run_cli(with({"train", "--output", (dir / "x.json").string()})).code, 2);
}

TEST(Cli, TrainFromPairs) {
  TempDir dir;
  json pairs = json::array();
  for (int i = 0; i < 10; ++i) pairs.push_back({{"representation", {i * 0.1, 1.0 - i * 0.1}}, {"accuracy", 0.3}});
  atomic_write(dir / "pairs.json", pairs.dump());
  Outcome o = run_cli({"train", "--pairs", (dir / "pairs.json").string(), "--output", (dir / "m.json").string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json::parse(o.out)["input_dim"], 2);
  pairs[3]["accuracy"] = 1.5;
  atomic_write(dir / "pairs.json", pairs.dump());
  EXPECT_EQ(run_cli({"train", "--pairs", (dir / "pairs.json").string(), "--output", (dir / "m.json").string()}).code,
            4);
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string("\"") + AUTOEVAL_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliBinary, ExitCodes) {
  EXPECT_EQ(run_binary("--help"), 0);
  EXPECT_EQ(run_binary("synth --no-such-flag"), 2);
  EXPECT_EQ(run_binary("validate --input \"" + (workspace() / record_file_name(0)).string() + "\""), 0);
  EXPECT_EQ(run_binary("validate --input /nonexistent/x.fset"), 3);
}

}  // namespace
}  // namespace autoeval
