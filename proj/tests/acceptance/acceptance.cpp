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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 6-8 and 10 share one run over the default
// workspace; 9 drives the CLI twice on a small one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "autoeval/autoeval.hpp"
#include "autoeval/cli.hpp"

namespace {

using namespace autoeval;
namespace fs = std::filesystem;

// Pinned tolerances and budgets.
constexpr int kFpsSets = 200;
constexpr double kFpsSeconds = 5.0;
constexpr int kKMeansSets = 100;
constexpr double kKMeansSeconds = 10.0;
constexpr double kCenterTol = 1e-9;
constexpr double kSingleCenterTol = 1e-12;
constexpr double kTraceRelSlack = 1e-12;  // round-off allowance on the objective trace
constexpr double kFdSelfTol = 1e-8;
constexpr double kFdSymTol = 1e-8;
constexpr double kFdDiagTol = 1e-6;
constexpr double kFd1dTol = 1e-8;
constexpr double kShapeSumTol = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kOverfitTol = 1e-3;
constexpr double kOrderingCpuMinutes = 15.0;
constexpr int kSeeds = 5;
constexpr int kRandomDraws = 5;

int failures = 0;
std::map<int, std::string> lines;  // printed in criterion order at the end

void verdict(int id, bool pass, const std::string& what, const std::string& detail) {
  if (!pass) ++failures;
  std::ostringstream os;
  os << "criterion " << id << ": " << (pass ? "PASS" : "FAIL") << "  " << what << "  [" << detail << "]";
  lines[id] = os.str();
  std::cerr << os.str() << std::endl;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

Matrix gaussian(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

double sq(const Matrix& x, Eigen::Index i, const Eigen::RowVectorXd& p) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) s += (x(i, j) - p[j]) * (x(i, j) - p[j]);
  return s;
}

// ---------------------------------------------------------------------------

void criterion1() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> nd(1, 64), dd(1, 8);
  int mismatches = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < kFpsSets; ++trial) {
    const int n = nd(rng), d = dd(rng);
    const int s = std::uniform_int_distribution<int>(1, std::min(n, 8))(rng);
    Matrix x = gaussian(n, d, rng);
    if (trial % 2) x = x.unaryExpr([](double v) { return std::round(2.0 * v); });  // forces ties
    // Greedy max-min by definition, starting from the point farthest from the mean.
    const Eigen::RowVectorXd mean = x.colwise().mean();
    std::vector<Eigen::Index> oracle;
    Eigen::Index first = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (sq(x, i, mean) > sq(x, first, mean)) first = i;
    oracle.push_back(first);
    while (static_cast<int>(oracle.size()) < s) {
      Eigen::Index arg = -1;
      double best = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (std::find(oracle.begin(), oracle.end(), i) != oracle.end()) continue;
        double m = std::numeric_limits<double>::infinity();
        for (Eigen::Index c : oracle) m = std::min(m, sq(x, i, x.row(c)));
        if (m > best) {
          best = m;
          arg = i;
        }
      }
      oracle.push_back(arg);
    }
    if (fps_indices(x, s) != oracle) ++mismatches;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  verdict(1, mismatches == 0 && secs < kFpsSeconds, "FPS matches brute-force greedy oracle on 200 sets",
         std::to_string(mismatches) + " mismatches, " + fmt("%.3f s", secs));
}

void criterion2() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> nd(5, 80), dd(1, 8), kd(1, 8);
  int bad_trace = 0, bad_centers = 0, converged = 0;
  double worst_center = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int trial = 0; trial < kKMeansSets; ++trial) {
    const int k = kd(rng);
    const Matrix x = gaussian(std::max(nd(rng), k), dd(rng), rng);
    const KMeansResult r = kmeans(x, {k, static_cast<std::uint64_t>(trial), 100, 0.0});
    for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
      if (r.objective_trace[t] > r.objective_trace[t - 1] * (1.0 + kTraceRelSlack)) {
        ++bad_trace;
        break;
      }
    if (!r.converged) continue;
    ++converged;
    Matrix sums = Matrix::Zero(k, x.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      sums.row(r.assignment[i]) += x.row(i);
      ++counts[static_cast<std::size_t>(r.assignment[i])];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      const double e = (sums.row(c) / counts[static_cast<std::size_t>(c)] - r.centers.row(c)).cwiseAbs().maxCoeff();
      worst_center = std::max(worst_center, e);
      if (e > kCenterTol) ++bad_centers;
    }
  }
  const Matrix x = gaussian(60, 5, rng);
  const double single = (kmeans(x, {1, 3}).centers.row(0) - x.colwise().mean()).cwiseAbs().maxCoeff();
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = bad_trace == 0 && bad_centers == 0 && single <= kSingleCenterTol && secs < kKMeansSeconds;
  verdict(2, pass, "k-means objective non-increasing, centers are means, K=1 is the global mean",
         std::to_string(bad_trace) + " trace violations, " + std::to_string(converged) + "/100 converged, " +
             fmt("worst center err %.2e, ", worst_center) + fmt("K=1 err %.2e, ", single) + fmt("%.3f s", secs));
}

void criterion3() {
  std::mt19937_64 rng(303);
  double self = 0.0, asym = 0.0, diag = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 1 + trial % 8;
    const GaussianSummary a = gaussian_summary(Matrix(gaussian(3 * d + 5, d, rng) * gaussian(d, d, rng)));
    const GaussianSummary b = gaussian_summary(Matrix(gaussian(3 * d + 5, d, rng) * gaussian(d, d, rng)));
    self = std::max(self, frechet_distance(a, a));
    asym = std::max(asym, std::abs(frechet_distance(a, b) - frechet_distance(b, a)));
  }
  std::uniform_real_distribution<double> mu(-3, 3), var(0.01, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 10;
    GaussianSummary a{Vector(d), Matrix::Zero(d, d)}, b{Vector(d), Matrix::Zero(d, d)};
    double oracle = 0.0;
    for (int j = 0; j < d; ++j) {
      a.mean[j] = mu(rng);
      b.mean[j] = mu(rng);
      a.covariance(j, j) = var(rng);
      b.covariance(j, j) = var(rng);
      const double ds = std::sqrt(a.covariance(j, j)) - std::sqrt(b.covariance(j, j));
      oracle += (a.mean[j] - b.mean[j]) * (a.mean[j] - b.mean[j]) + ds * ds;
    }
    diag = std::max(diag, std::abs(frechet_distance(a, b) - oracle));
  }
  const GaussianSummary p{Vector::Constant(1, 0.0), Matrix::Constant(1, 1, 1.0)};
  const GaussianSummary q{Vector::Constant(1, 1.0), Matrix::Constant(1, 1, 1.0)};
  const double one = std::abs(frechet_distance(p, q) - 1.0);
  verdict(3, self <= kFdSelfTol && asym <= kFdSymTol && diag <= kFdDiagTol && one <= kFd1dTol,
         "Frechet distance: self, symmetry, diagonal closed form, 1-D example",
         fmt("max FD(P,P) %.2e, ", self) + fmt("max asym %.2e, ", asym) + fmt("max diag err %.2e, ", diag) +
             fmt("1-D err %.2e", one));
}

void criterion4() {
  std::mt19937_64 rng(404);
  RepresentationOptions o;
  FeatureSet src;
  src.features = gaussian(400, 6, rng);
  src.labels = std::vector<int>(400);
  for (int i = 0; i < 400; ++i) (*src.labels)[static_cast<std::size_t>(i)] = i % 4;
  src.num_classes = 4;
  const ReferenceFrame frame = build_reference_frame(src, o);
  double worst_sum = 0.0;
  bool permutation_exact = true, conserved = true;
  for (int trial = 0; trial < 30; ++trial) {
    FeatureSet set;
    const Eigen::Index n = 50 + 10 * trial;
    set.features = gaussian(n, 6, rng, 1.0 + 0.2 * trial);  // wider sets push mass past the edges
    set.features.array() += 0.3 * (trial % 5);
    const Matrix h = compute_shape(set, frame);
    worst_sum = std::max(worst_sum, (h.rowwise().sum().array() - 1.0).abs().maxCoeff());
    // Counts recovered from the histogram must add back to N.
    for (Eigen::Index d = 0; d < h.rows(); ++d)
      if (std::abs((h.row(d) * static_cast<double>(n)).sum() - static_cast<double>(n)) > 1e-9 * n) conserved = false;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    FeatureSet shuffled;
    shuffled.features = gather_rows(set.features, perm);
    if (compute_shape(shuffled, frame) != h) permutation_exact = false;
  }
  verdict(4, worst_sum <= kShapeSumTol && permutation_exact && conserved,
         "histogram rows sum to 1, permutation invariant, no mass lost when clipping",
         fmt("max |row sum - 1| %.2e, ", worst_sum) + "permutation " + (permutation_exact ? "exact" : "differs") +
             ", clipping " + (conserved ? "conserves mass" : "loses mass"));
}

void criterion5() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 4 + trial % 9;
    const RegressorModel m = RegressorModel::initialized({in, 16, 8, 1}, static_cast<std::uint64_t>(trial));
    worst = std::max(worst, gradient_check(m, Vector(gaussian(in, 1, rng).col(0)), u(rng),
                                           static_cast<std::uint64_t>(trial)));
  }
  // A single pair, repeated so the validation hold-out sees it too.
  const Eigen::RowVectorXd x = gaussian(1, 12, rng);
  const TrainingPairs pairs{x.replicate(10, 1), Eigen::VectorXd::Constant(10, 0.7)};
  const double gap = std::abs(fit(pairs, TrainConfig{}).model.predict(x.transpose()) - 0.7);
  verdict(5, worst < kGradTol && gap < kOverfitTol, "regressor gradients match finite differences; single pair overfit",
         fmt("max rel err %.2e, ", worst) + fmt("|pred - target| %.2e", gap));
}

// ---------------------------------------------------------------------------

void criteria_6_to_8_and_10(const fs::path& workdir) {
  const fs::path ws = workdir / "default";
  fs::remove_all(ws);
  const double cpu0 = cpu_seconds();
  MetasetConfig mc;  // 200/50/50 sets, C=10
  RepresentationOptions ro;  // B=30, K=C, S=100
  synthesize_workspace(mc, ro, ws);
  const double synth_cpu = cpu_seconds() - cpu0;

  ExperimentConfig ec;
  ec.workspace = ws;
  ec.representation = ro;
  ec.random_draws = kRandomDraws;
  ec.seeds.clear();
  for (int s = 0; s < kSeeds; ++s) ec.seeds.push_back(static_cast<std::uint64_t>(s));
  ec.methods.clear();
  for (const char* m : {"OURS", "FD_ONLY", "AC_ONLY", "OURS_RANDOM_SAMPLER", "OURS_MINUS_SHAPE",
                        "OURS_MINUS_CLUSTER", "OURS_MINUS_SAMPLE", "PRED_SCORE(0.8)", "PRED_SCORE(0.9)"})
    ec.methods.push_back(parse_method(m));
  ec.check();

  const double cpu1 = cpu_seconds();
  WorkspaceData data(ws, ro);
  double ordering_cpu = synth_cpu + (cpu_seconds() - cpu1);
  ExperimentReport report;
  report.config = to_json(ec);
  for (std::size_t i = 0; i < data.size(); ++i) {
    report.record_index.push_back(data.manifest().records[i].index);
    report.record_split.push_back(data.split(i));
    report.truths.push_back(data.truth(i));
  }
  const int ordering_methods = 3;  // OURS, FD_ONLY, AC_ONLY lead the roster
  for (std::size_t mi = 0; mi < ec.methods.size(); ++mi)
    for (std::uint64_t seed : ec.seeds) {
      const double c0 = cpu_seconds();
      report.results.push_back(run_method(data, ec, ec.methods[mi], seed));
      if (static_cast<int>(mi) < ordering_methods) ordering_cpu += cpu_seconds() - c0;
      std::cerr << "  " << ec.methods[mi].name() << " seed " << seed << ": TEST_META "
                << format_percent(report.results.back().rmse_percent[static_cast<int>(Split::kTestMeta)]) << "%"
                << std::endl;
    }
  write_report(report, workdir / "default_report");

  const auto mean_test = [&](const char* m) { return report.mean_rmse(parse_method(m), Split::kTestMeta); };
  const double ours = mean_test("OURS"), fd = mean_test("FD_ONLY"), ac = mean_test("AC_ONLY");
  const double minutes = ordering_cpu / 60.0;
  verdict(6, ours <= fd && ours <= ac && minutes < kOrderingCpuMinutes,
         "mean TEST_META RMSE: OURS <= FD_ONLY and OURS <= AC_ONLY, under 15 CPU-minutes",
         fmt("OURS %.4f, ", ours) + fmt("FD_ONLY %.4f, ", fd) + fmt("AC_ONLY %.4f, ", ac) +
             fmt("%.2f CPU-min incl. synth", minutes));

  const double rnd = mean_test("OURS_RANDOM_SAMPLER");
  verdict(7, ours <= rnd, "mean TEST_META RMSE: OURS <= OURS_RANDOM_SAMPLER (5 draws per seed)",
         fmt("OURS %.4f, ", ours) + fmt("OURS_RANDOM_SAMPLER %.4f", rnd));

  const AblationTable table = ablation_table(report);
  std::cerr << ablation_csv(table);
  int nonneg = 0;
  std::string detail;
  for (const auto& [name, kind] : kAblations) {
    const double d = table.mean_delta(name, Split::kValMeta);
    nonneg += d >= 0.0;
    detail += std::string(name) + fmt(" %+.4f, ", d);
  }
  detail += "test deltas:";
  for (const auto& [name, kind] : kAblations) detail += " " + std::string(name) + fmt(" %+.4f", table.mean_delta(name, Split::kTestMeta));
  verdict(8, nonneg >= 2, "mean VAL_META leave-one-out delta >= 0 for at least 2 of 3 components", detail);

  int differing = 0;
  std::string per_seed;
  for (std::uint64_t seed : ec.seeds) {
    const double a = report.find(parse_method("PRED_SCORE(0.8)"), seed)->rmse_percent[static_cast<int>(Split::kTestMeta)];
    const double b = report.find(parse_method("PRED_SCORE(0.9)"), seed)->rmse_percent[static_cast<int>(Split::kTestMeta)];
    differing += std::abs(a - b) > 0.0;
    if (seed == 0) per_seed = fmt("seed 0: tau 0.8 %.4f, ", a) + fmt("tau 0.9 %.4f", b);
  }
  verdict(10, differing >= 1, "PRED_SCORE RMSE differs between tau=0.8 and tau=0.9 for some seed",
         per_seed + ", " + std::to_string(differing) + "/5 seeds differ");
}

void criterion9(const fs::path& workdir) {
  const nlohmann::json config = {
      {"seed", 7},
      {"metaset",
       {{"task", {{"raw_dim", 16}, {"classes", 5}, {"n_train", 2000}, {"n_test", 600}}},
        {"n_train_meta", 30},
        {"n_val_meta", 10},
        {"n_test_meta", 10}}},
      {"representation", {{"samples", 30}}},
      {"train", {{"hidden", {64, 16}}, {"epochs", 10}}},
      {"experiment",
       {{"methods", {"OURS", "FD_ONLY", "AC_ONLY", "OURS_RANDOM_SAMPLER", "PRED_SCORE(0.9)"}},
        {"seeds", {0, 1}},
        {"random_draws", 2}}}};
  const fs::path root = workdir / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  atomic_write(root / "config.json", config.dump());
  std::string manifests[2], csvs[2];
  bool ran = true;
  for (int run = 0; run < 2; ++run) {
    const fs::path ws = root / ("run" + std::to_string(run));
    std::ostringstream out, err;
    const std::string cfg = (root / "config.json").string();
    ran = ran && cli::run({"--config", cfg, "--workspace", ws.string(), "synth"}, out, err) == 0;
    ran = ran && cli::run({"--config", cfg, "--workspace", ws.string(), "evaluate"}, out, err) == 0;
    if (!ran) {
      std::cerr << err.str();
      break;
    }
    manifests[run] = read_file(ws / "manifest.json");
    csvs[run] = read_file(ws / "report.csv");
  }
  const bool same_manifest = ran && manifests[0] == manifests[1];
  const bool same_csv = ran && csvs[0] == csvs[1];
  verdict(9, same_manifest && same_csv, "two synth + evaluate runs with equal seeds are byte-identical",
         std::string(ran ? "" : "CLI failed, ") + "manifest " + (same_manifest ? "identical" : "differs") +
             ", report.csv " + (same_csv ? "identical" : "differs"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::string workdir = (fs::temp_directory_path() / "autoeval_acceptance").string();
  bool skip_slow = false;
  app.add_option("--workdir", workdir, "Scratch directory for generated workspaces");
  app.add_flag("--skip-end-to-end", skip_slow, "Skip criteria 6-8 and 10 (reported as FAIL)");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(workdir);

  try {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion9(workdir);
    if (skip_slow) {
      for (int id : {6, 7, 8, 10}) verdict(id, false, "skipped", "--skip-end-to-end");
    } else {
      criteria_6_to_8_and_10(workdir);
    }
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 1;
  }
  for (const auto& [id, line] : lines) std::cout << line << "\n";
  std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
