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

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoeval/baselines.hpp"
#include "autoeval/common.hpp"
#include "autoeval/error.hpp"
#include "autoeval/featureset.hpp"
#include "autoeval/json_util.hpp"
#include "autoeval/metaset.hpp"
#include "autoeval/regress.hpp"
#include "autoeval/represent.hpp"

namespace autoeval {

/// Root mean squared error, in percent.
inline double rmse(const std::vector<double>& predictions, const std::vector<double>& truths) {
  if (predictions.empty() || predictions.size() != truths.size())
    fail(ErrorKind::kInput, "rmse needs equal, nonzero lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - truths[i];
    s += e * e;
  }
  return 100.0 * std::sqrt(s / static_cast<double>(predictions.size()));
}

// ---------------------------------------------------------------------------
// Method roster.

enum class MethodKind {
  kOurs,
  kOursPlusGm,
  kOursRandomSampler,
  kShapeOnly,
  kClusterOnly,
  kSampleOnly,
  kOursMinusShape,
  kOursMinusCluster,
  kOursMinusSample,
  kFdOnly,
  kAcOnly,
  kFdSigmaTau,
  kPredScore,
  kEntropyScore,
  kOursPlusAc,
};

struct MethodInfo {
  MethodKind kind;
  const char* name;
  bool shape, clusters, fps, random, global_mean, ac;  // representation parts
};

inline constexpr MethodInfo kMethodTable[] = {
    {MethodKind::kOurs, "OURS", true, true, true, false, false, false},
    {MethodKind::kOursPlusGm, "OURS_PLUS_GM", true, true, true, false, true, false},
    {MethodKind::kOursRandomSampler, "OURS_RANDOM_SAMPLER", true, true, false, true, false, false},
    {MethodKind::kShapeOnly, "SHAPE_ONLY", true, false, false, false, false, false},
    {MethodKind::kClusterOnly, "CLUSTER_ONLY", false, true, false, false, false, false},
    {MethodKind::kSampleOnly, "SAMPLE_ONLY", false, false, true, false, false, false},
    {MethodKind::kOursMinusShape, "OURS_MINUS_SHAPE", false, true, true, false, false, false},
    {MethodKind::kOursMinusCluster, "OURS_MINUS_CLUSTER", true, false, true, false, false, false},
    {MethodKind::kOursMinusSample, "OURS_MINUS_SAMPLE", true, true, false, false, false, false},
    {MethodKind::kFdOnly, "FD_ONLY", false, false, false, false, false, false},
    {MethodKind::kAcOnly, "AC_ONLY", false, false, false, false, false, false},
    {MethodKind::kFdSigmaTau, "FD_SIGMA_TAU", false, false, false, false, false, false},
    {MethodKind::kPredScore, "PRED_SCORE", false, false, false, false, false, false},
    {MethodKind::kEntropyScore, "ENTROPY_SCORE", false, false, false, false, false, false},
    {MethodKind::kOursPlusAc, "OURS_PLUS_AC", true, true, true, false, false, true},
};

inline const MethodInfo& info(MethodKind k) {
  for (const auto& m : kMethodTable)
    if (m.kind == k) return m;
  fail(ErrorKind::kConfig, "unknown method");
}

struct Method {
  MethodKind kind = MethodKind::kOurs;
  double tau = 0.0;  // threshold for PRED_SCORE / ENTROPY_SCORE

  bool is_threshold() const { return kind == MethodKind::kPredScore || kind == MethodKind::kEntropyScore; }
  bool is_semi_structured() const {
    const auto& i = info(kind);
    return i.shape || i.clusters || i.fps || i.random;
  }

  std::string name() const {
    if (!is_threshold()) return info(kind).name;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s(%g)", info(kind).name, tau);
    return buf;
  }

  friend bool operator==(const Method& a, const Method& b) {
    return a.kind == b.kind && (!a.is_threshold() || a.tau == b.tau);
  }
};

inline Method parse_method(const std::string& text) {
  std::string base = text;
  std::optional<double> tau;
  if (const auto open = text.find('('); open != std::string::npos) {
    if (text.back() != ')') fail(ErrorKind::kConfig, "malformed method '" + text + "'");
    base = text.substr(0, open);
    const std::string arg = text.substr(open + 1, text.size() - open - 2);
    char* end = nullptr;
    const double v = std::strtod(arg.c_str(), &end);
    if (arg.empty() || *end != '\0') fail(ErrorKind::kConfig, "bad threshold in '" + text + "'");
    tau = v;
  }
  for (const auto& m : kMethodTable) {
    if (base != m.name) continue;
    Method out{m.kind, 0.0};
    if (out.is_threshold()) {
      if (!tau || !(*tau > 0.0 && *tau < 1.0))
        fail(ErrorKind::kConfig, base + " needs a threshold in (0,1), e.g. " + base + "(0.9)");
      out.tau = *tau;
    } else if (tau) {
      fail(ErrorKind::kConfig, base + " takes no threshold");
    }
    return out;
  }
  fail(ErrorKind::kConfig, "unknown method '" + text + "'");
}

inline std::vector<Method> default_roster() {
  std::vector<Method> out;
  for (const auto& m : kMethodTable) {
    if (m.kind == MethodKind::kPredScore) {
      out.push_back({m.kind, 0.8});
      out.push_back({m.kind, 0.9});
    } else if (m.kind == MethodKind::kEntropyScore) {
      out.push_back({m.kind, 0.2});
      out.push_back({m.kind, 0.3});
    } else {
      out.push_back({m.kind, 0.0});
    }
  }
  return out;
}

struct ExperimentConfig {
  std::filesystem::path workspace;
  RepresentationOptions representation;
  std::vector<Method> methods = default_roster();
  TrainConfig train;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int random_draws = 5;  // OURS_RANDOM_SAMPLER runs averaged per seed

  void check() const {
    representation.check();
    train.check();
    if (methods.empty()) fail(ErrorKind::kConfig, "methods must be non-empty");
    if (seeds.empty()) fail(ErrorKind::kConfig, "seeds must be non-empty");
    if (random_draws < 1) fail(ErrorKind::kConfig, "random_draws must be >= 1");
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  std::vector<std::string> methods;
  for (const auto& m : c.methods) methods.push_back(m.name());
  return {{"workspace", c.workspace.string()},
          {"representation", to_json(c.representation)},
          {"methods", methods},
          {"train", to_json(c.train)},
          {"seeds", c.seeds},
          {"random_draws", c.random_draws}};
}

inline void merge_json(ExperimentConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kConfig, "experiment config must be a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "workspace") c.workspace = val.get<std::string>();
      else if (key == "representation") merge_json(c.representation, val);
      else if (key == "train") merge_json(c.train, val);
      else if (key == "seeds") c.seeds = val.get<std::vector<std::uint64_t>>();
      else if (key == "random_draws") c.random_draws = val.get<int>();
      else if (key == "methods") {
        c.methods.clear();
        for (const auto& m : val) c.methods.push_back(parse_method(m.get<std::string>()));
      } else fail(ErrorKind::kConfig, "unknown experiment option '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("experiment config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Workspace data with cached per-set representation parts.

/// Loads every record of a workspace once and caches the parts of each
/// set's representation that do not depend on the experiment seed. Features
/// are kept in canonical row order, so parts match assemble().
class WorkspaceData {
 public:
  WorkspaceData(const std::filesystem::path& workspace, const RepresentationOptions& opts)
      : workspace_(workspace), opts_(opts) {
    opts_.check();
    manifest_ = load_manifest(workspace);
    source_ = load_checked(workspace / manifest_.source_path);
    if (!source_.labels) fail(ErrorKind::kWorkspace, "source set has no labels");
    frame_ = build_reference_frame(source_, opts_);
    train_summary_ = gaussian_summary(source_);
    for (const auto& rec : manifest_.records) {
      FeatureSet set = load_checked(workspace / rec.path);
      if (set.dims() != frame_.dims())
        fail(ErrorKind::kWorkspace, rec.path + " has D=" + std::to_string(set.dims()) + ", source has D=" +
                                        std::to_string(frame_.dims()));
      if (!set.softmax) fail(ErrorKind::kWorkspace, rec.path + " has no softmax outputs");
      if (set.rows() < opts_.samples || set.rows() < frame_.clusters())
        fail(ErrorKind::kDimension, rec.path + ": N < S or N < K");
      SetCache c;
      c.canonical = gather_rows(set.features, canonical_order(set.features));
      c.softmax = std::move(set);  // keeps softmax for threshold estimators
      c.softmax.features.resize(0, 0);
      c.truth = rec.accuracy();
      sets_.push_back(std::move(c));
    }
  }

  const Manifest& manifest() const { return manifest_; }
  const ReferenceFrame& frame() const { return frame_; }
  const FeatureSet& source() const { return source_; }
  std::size_t size() const { return sets_.size(); }
  double truth(std::size_t i) const { return sets_[i].truth; }
  Split split(std::size_t i) const { return manifest_.records[i].split; }

  // Options used for a given experiment seed and random-sampler draw.
  RepresentationOptions options_for(std::uint64_t seed, int draw, std::size_t record) const {
    RepresentationOptions o = opts_;
    o.kmeans_seed = mix_seed(opts_.kmeans_seed, seed);
    o.sampler_seed = mix_seed(mix_seed(opts_.sampler_seed, seed), 1000 + static_cast<std::uint64_t>(draw) * 100000 +
                                                                   manifest_.records[record].index);
    return o;
  }

  /// Flat representation of every record for `method` (one row per record).
  /// Threshold methods yield their scalar estimate.
  Eigen::MatrixXd representations(const Method& method, std::uint64_t seed, int draw = 0) {
    const MethodInfo& mi = info(method.kind);
    std::vector<Vector> rows(sets_.size());
    for (std::size_t i = 0; i < sets_.size(); ++i) rows[i] = representation(method, mi, i, seed, draw);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    return out;
  }

 private:
  struct SetCache {
    Matrix canonical;
    FeatureSet softmax;
    double truth = 0.0;
    std::optional<Matrix> shape, fps;
    std::optional<Vector> gm;
    std::optional<double> ac;
    std::optional<GaussianSummary> summary;
    std::optional<double> fd;
    std::map<std::uint64_t, Matrix> clusters;  // by experiment seed
  };

  static FeatureSet load_checked(const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) fail(ErrorKind::kWorkspace, "missing file " + p.string());
    return load(p);
  }

  Vector representation(const Method& method, const MethodInfo& mi, std::size_t i, std::uint64_t seed, int draw) {
    SetCache& c = sets_[i];
    FeatureSet view;  // borrowed canonical features for the component functions
    auto features = [&]() -> const FeatureSet& {
      if (view.features.size() == 0) view.features = c.canonical;
      return view;
    };
    switch (method.kind) {
      case MethodKind::kPredScore:
        return Vector::Constant(1, prediction_score_estimate(c.softmax, method.tau));
      case MethodKind::kEntropyScore:
        return Vector::Constant(1, entropy_score_estimate(c.softmax, method.tau));
      case MethodKind::kAcOnly:
        return Vector::Constant(1, ac(c));
      case MethodKind::kFdOnly:
        return Vector::Constant(1, fd(c));
      case MethodKind::kFdSigmaTau: {
        const GaussianSummary& g = summary(c);
        const Eigen::Index d = g.mean.size();
        Vector v(1 + 2 * d);
        v[0] = fd(c);
        v.segment(1, d) = g.mean;
        v.segment(1 + d, d) = g.covariance.diagonal();
        return v;
      }
      default:
        break;
    }
    std::vector<const Matrix*> parts;
    if (mi.shape) {
      if (!c.shape) c.shape = compute_shape(features(), frame_);
      parts.push_back(&*c.shape);
    }
    if (mi.clusters) {
      auto it = c.clusters.find(seed);
      if (it == c.clusters.end())
        it = c.clusters.emplace(seed, compute_clusters(features(), frame_, options_for(seed, 0, i))).first;
      parts.push_back(&it->second);
    }
    Matrix random_rows;
    if (mi.fps) {
      if (!c.fps) c.fps = fps_sample(features(), opts_.samples);
      parts.push_back(&*c.fps);
    }
    if (mi.random) {
      random_rows = random_sample(features(), opts_.samples, options_for(seed, draw, i).sampler_seed);
      parts.push_back(&random_rows);
    }
    Eigen::Index len = 0;
    for (const Matrix* p : parts) len += p->size();
    if (mi.global_mean) {
      if (!c.gm) c.gm = global_mean(c.canonical);
      len += c.gm->size();
    }
    if (mi.ac) len += 1;
    Vector flat(len);
    Eigen::Index at = 0;
    for (const Matrix* p : parts) {
      std::copy(p->data(), p->data() + p->size(), flat.data() + at);
      at += p->size();
    }
    if (mi.global_mean) {
      flat.segment(at, c.gm->size()) = *c.gm;
      at += c.gm->size();
    }
    if (mi.ac) flat[at] = ac(c);
    return flat;
  }

  double ac(SetCache& c) {
    if (!c.ac) c.ac = average_confidence(c.softmax);
    return *c.ac;
  }
  const GaussianSummary& summary(SetCache& c) {
    if (!c.summary) c.summary = gaussian_summary(c.canonical);
    return *c.summary;
  }
  double fd(SetCache& c) {
    if (!c.fd) c.fd = frechet_distance(summary(c), train_summary_);
    return *c.fd;
  }

  std::filesystem::path workspace_;
  RepresentationOptions opts_;
  Manifest manifest_;
  FeatureSet source_;
  ReferenceFrame frame_;
  GaussianSummary train_summary_;
  std::vector<SetCache> sets_;
};

// ---------------------------------------------------------------------------
// Reports.

inline constexpr Split kSplits[] = {Split::kTrainMeta, Split::kValMeta, Split::kTestMeta};

struct DrawResult {
  int draw = 0;
  int best_epoch = 0;  // 0 for threshold methods
  std::vector<double> predictions;  // one per record, manifest order
  std::array<double, 3> rmse_percent{};
};

struct MethodSeedResult {
  Method method;
  std::uint64_t seed = 0;
  std::array<double, 3> rmse_percent{};  // mean over draws
  std::vector<DrawResult> draws;
};

struct ExperimentReport {
  nlohmann::json config;
  std::vector<int> record_index;
  std::vector<Split> record_split;
  std::vector<double> truths;
  std::vector<MethodSeedResult> results;
  double runtime_seconds = 0.0;

  const MethodSeedResult* find(const Method& m, std::uint64_t seed) const {
    for (const auto& r : results)
      if (r.method == m && r.seed == seed) return &r;
    return nullptr;
  }

  std::vector<std::uint64_t> seeds() const {
    std::vector<std::uint64_t> out;
    for (const auto& r : results)
      if (std::find(out.begin(), out.end(), r.seed) == out.end()) out.push_back(r.seed);
    return out;
  }

  bool has(const Method& m) const {
    for (const auto& r : results)
      if (r.method == m) return true;
    return false;
  }

  double mean_rmse(const Method& m, Split s) const {
    double total = 0.0;
    int n = 0;
    for (const auto& r : results)
      if (r.method == m) {
        total += r.rmse_percent[static_cast<int>(s)];
        ++n;
      }
    if (n == 0) fail(ErrorKind::kInput, "report has no results for " + m.name());
    return total / n;
  }
};

namespace detail {

inline std::array<double, 3> split_rmse(const std::vector<double>& pred, const std::vector<double>& truth,
                                        const std::vector<Split>& split) {
  std::array<double, 3> out{};
  for (Split s : kSplits) {
    std::vector<double> p, t;
    for (std::size_t i = 0; i < pred.size(); ++i)
      if (split[i] == s) {
        p.push_back(pred[i]);
        t.push_back(truth[i]);
      }
    out[static_cast<int>(s)] = p.empty() ? std::nan("") : rmse(p, t);
  }
  return out;
}

inline TrainingPairs pairs_of(const Eigen::MatrixXd& reps, const std::vector<double>& truths,
                              const std::vector<Split>& split, Split which) {
  std::vector<Eigen::Index> rows;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == which) rows.push_back(static_cast<Eigen::Index>(i));
  TrainingPairs p{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), reps.cols()),
                  Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    p.inputs.row(static_cast<Eigen::Index>(r)) = reps.row(rows[r]);
    p.targets[static_cast<Eigen::Index>(r)] = truths[static_cast<std::size_t>(rows[r])];
  }
  return p;
}

}  // namespace detail

inline std::string format_percent(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// Seed for the regressor of one (experiment seed, draw); independent of the
// roster so a method's numbers do not change when others are added.
inline std::uint64_t regressor_seed(const TrainConfig& train, std::uint64_t seed, int draw) {
  return mix_seed(mix_seed(train.seed, seed), 500 + static_cast<std::uint64_t>(draw));
}

/// Fits and scores one method for one seed on loaded workspace data.
inline MethodSeedResult run_method(WorkspaceData& data, const ExperimentConfig& cfg, const Method& method,
                                   std::uint64_t seed) {
  std::vector<double> truths(data.size());
  std::vector<Split> split(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    truths[i] = data.truth(i);
    split[i] = data.split(i);
  }
  MethodSeedResult res;
  res.method = method;
  res.seed = seed;
  const int draws = method.kind == MethodKind::kOursRandomSampler ? cfg.random_draws : 1;
  for (int draw = 0; draw < draws; ++draw) {
    DrawResult dr;
    dr.draw = draw;
    const Eigen::MatrixXd reps = data.representations(method, seed, draw);
    if (method.is_threshold()) {
      dr.predictions.assign(reps.data(), reps.data() + reps.size());
    } else {
      TrainConfig tc = cfg.train;
      tc.seed = regressor_seed(cfg.train, seed, draw);
      const TrainingPairs train = detail::pairs_of(reps, truths, split, Split::kTrainMeta);
      const TrainingPairs val = detail::pairs_of(reps, truths, split, Split::kValMeta);
      if (train.size() < 2) fail(ErrorKind::kWorkspace, "need at least 2 TRAIN_META sets");
      if (val.size() < 1) fail(ErrorKind::kWorkspace, "need at least 1 VAL_META set");
      FitResult fr = fit(train, tc, val);
      dr.best_epoch = fr.best_epoch;
      const Eigen::VectorXd pred = fr.model.predict_batch(reps);
      dr.predictions.assign(pred.data(), pred.data() + pred.size());
    }
    dr.rmse_percent = detail::split_rmse(dr.predictions, truths, split);
    res.draws.push_back(std::move(dr));
  }
  for (Split s : kSplits) {
    double total = 0.0;
    for (const auto& dr : res.draws) total += dr.rmse_percent[static_cast<int>(s)];
    res.rmse_percent[static_cast<int>(s)] = total / static_cast<double>(res.draws.size());
  }
  // NaN marks an empty split; anything else non-finite is an error.
  for (double r : res.rmse_percent)
    if (std::isinf(r)) fail(ErrorKind::kNumeric, "non-finite RMSE for " + method.name());
  return res;
}

/// Builds every method's representation for every set, trains the regressor
/// on TRAIN_META (checkpointing on VAL_META) and scores all splits, for each
/// seed. Threshold methods use their per-set fraction directly.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
  cfg.check();
  const auto t0 = std::chrono::steady_clock::now();
  WorkspaceData data(cfg.workspace, cfg.representation);
  ExperimentReport report;
  report.config = to_json(cfg);
  for (std::size_t i = 0; i < data.size(); ++i) {
    report.record_index.push_back(data.manifest().records[i].index);
    report.record_split.push_back(data.split(i));
    report.truths.push_back(data.truth(i));
  }
  for (std::uint64_t seed : cfg.seeds)
    for (const Method& m : cfg.methods) {
      report.results.push_back(run_method(data, cfg, m, seed));
      if (log) {
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        *log << "seed " << seed << " " << m.name() << ": TEST_META RMSE "
             << format_percent(report.results.back().rmse_percent[static_cast<int>(Split::kTestMeta)]) << "% ("
             << static_cast<long>(elapsed) << " s elapsed)" << std::endl;
      }
    }
  // Stable order: methods as configured, then seeds.
  std::vector<MethodSeedResult> ordered;
  for (const Method& m : cfg.methods)
    for (std::uint64_t seed : cfg.seeds) ordered.push_back(*report.find(m, seed));
  report.results = std::move(ordered);
  report.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

inline std::string report_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "method,split,seed,rmse_percent\n";
  for (const auto& res : r.results)
    for (Split s : kSplits)
      os << res.method.name() << ',' << to_string(s) << ',' << res.seed << ','
         << format_percent(res.rmse_percent[static_cast<int>(s)]) << '\n';
  return os.str();
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  using nlohmann::json;
  auto split_obj = [](const std::array<double, 3>& v) {
    json j;
    for (Split s : kSplits) j[to_string(s)] = v[static_cast<int>(s)];
    return j;
  };
  json records = json::array();
  for (std::size_t i = 0; i < r.truths.size(); ++i)
    records.push_back({{"index", r.record_index[i]}, {"split", to_string(r.record_split[i])}, {"truth", r.truths[i]}});
  json results = json::array();
  for (const auto& res : r.results) {
    json draws = json::array();
    for (const auto& d : res.draws)
      draws.push_back({{"draw", d.draw},
                       {"best_epoch", d.best_epoch},
                       {"rmse_percent", split_obj(d.rmse_percent)},
                       {"predictions", d.predictions}});
    results.push_back({{"method", res.method.name()},
                       {"seed", res.seed},
                       {"rmse_percent", split_obj(res.rmse_percent)},
                       {"draws", std::move(draws)}});
  }
  json summary = json::array();
  std::vector<Method> seen;
  for (const auto& res : r.results) {
    if (std::find(seen.begin(), seen.end(), res.method) != seen.end()) continue;
    seen.push_back(res.method);
    for (Split s : kSplits) {
      std::vector<double> v;
      for (const auto& x : r.results)
        if (x.method == res.method) v.push_back(x.rmse_percent[static_cast<int>(s)]);
      double mean = 0.0, var = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      summary.push_back({{"method", res.method.name()}, {"split", to_string(s)}, {"mean", mean}, {"std", sd}});
    }
  }
  return {{"format", "autoeval-report"},
          {"version", 1},
          {"config", r.config},
          {"records", std::move(records)},
          {"results", std::move(results)},
          {"summary", std::move(summary)},
          {"metadata", {{"runtime_seconds", r.runtime_seconds}}}};
}

inline ExperimentReport report_from_json(const nlohmann::json& j) {
  using json_util::field;
  const std::string what = "report";
  if (field<std::string>(j, "format", what) != "autoeval-report" || field<int>(j, "version", what) != 1)
    fail(ErrorKind::kFormat, "not a version-1 report");
  ExperimentReport r;
  r.config = field<nlohmann::json>(j, "config", what);
  for (const auto& rec : field<nlohmann::json>(j, "records", what)) {
    r.record_index.push_back(field<int>(rec, "index", "report record"));
    r.record_split.push_back(split_from_string(field<std::string>(rec, "split", "report record")));
    r.truths.push_back(field<double>(rec, "truth", "report record"));
  }
  auto split_arr = [&](const nlohmann::json& o) {
    std::array<double, 3> v{};
    for (Split s : kSplits) {
      const auto& x = o.at(to_string(s));
      v[static_cast<int>(s)] = x.is_null() ? std::nan("") : x.get<double>();
    }
    return v;
  };
  try {
    for (const auto& res : field<nlohmann::json>(j, "results", what)) {
      MethodSeedResult m;
      m.method = parse_method(res.at("method").get<std::string>());
      m.seed = res.at("seed").get<std::uint64_t>();
      m.rmse_percent = split_arr(res.at("rmse_percent"));
      for (const auto& d : res.at("draws")) {
        DrawResult dr;
        dr.draw = d.at("draw").get<int>();
        dr.best_epoch = d.at("best_epoch").get<int>();
        dr.rmse_percent = split_arr(d.at("rmse_percent"));
        dr.predictions = d.at("predictions").get<std::vector<double>>();
        m.draws.push_back(std::move(dr));
      }
      r.results.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, std::string("report results: ") + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, e.what());
  }
  return r;
}

// ---------------------------------------------------------------------------
// Leave-one-out ablation.

struct AblationRow {
  std::string component;  // "shape", "clusters", "samples"
  Split split = Split::kValMeta;
  std::uint64_t seed = 0;
  double delta_percent = 0.0;  // RMSE(without component) - RMSE(full)
};

struct AblationTable {
  std::vector<AblationRow> rows;

  double mean_delta(const std::string& component, Split split) const {
    double total = 0.0;
    int n = 0;
    for (const auto& r : rows)
      if (r.component == component && r.split == split) {
        total += r.delta_percent;
        ++n;
      }
    if (n == 0) fail(ErrorKind::kInput, "no ablation rows for " + component);
    return total / n;
  }
};

inline constexpr std::pair<const char*, MethodKind> kAblations[] = {
    {"shape", MethodKind::kOursMinusShape},
    {"clusters", MethodKind::kOursMinusCluster},
    {"samples", MethodKind::kOursMinusSample},
};

inline AblationTable ablation_table(const ExperimentReport& report) {
  const Method full{MethodKind::kOurs, 0.0};
  if (!report.has(full)) fail(ErrorKind::kInput, "ablation needs OURS in the report");
  for (const auto& [name, kind] : kAblations)
    if (!report.has({kind, 0.0}))
      fail(ErrorKind::kInput, std::string("ablation needs ") + info(kind).name + " in the report");
  AblationTable t;
  for (std::uint64_t seed : report.seeds()) {
    const MethodSeedResult* base = report.find(full, seed);
    if (!base) fail(ErrorKind::kInput, "OURS missing for seed " + std::to_string(seed));
    for (const auto& [name, kind] : kAblations) {
      const MethodSeedResult* cut = report.find({kind, 0.0}, seed);
      if (!cut) fail(ErrorKind::kInput, std::string(info(kind).name) + " missing for seed " + std::to_string(seed));
      for (Split s : kSplits)
        t.rows.push_back({name, s, seed, cut->rmse_percent[static_cast<int>(s)] - base->rmse_percent[static_cast<int>(s)]});
    }
  }
  return t;
}

inline std::string ablation_csv(const AblationTable& t) {
  std::ostringstream os;
  os << "component,split,seed,delta_percent\n";
  for (const auto& [name, kind] : kAblations)
    for (Split s : kSplits) {
      for (const auto& r : t.rows)
        if (r.component == name && r.split == s)
          os << name << ',' << to_string(s) << ',' << r.seed << ',' << format_percent(r.delta_percent) << '\n';
      os << name << ',' << to_string(s) << ",mean," << format_percent(t.mean_delta(name, s)) << '\n';
    }
  return os.str();
}

/// Writes report.json, report.csv and, when the roster allows it, ablation.csv.
inline void write_report(const ExperimentReport& r, const std::filesystem::path& dir) {
  atomic_write(dir / "report.json", to_json(r).dump(2));
  atomic_write(dir / "report.csv", report_csv(r));
  bool ablatable = r.has({MethodKind::kOurs, 0.0});
  for (const auto& [name, kind] : kAblations) ablatable = ablatable && r.has({kind, 0.0});
  if (ablatable) atomic_write(dir / "ablation.csv", ablation_csv(ablation_table(r)));
}

// ---------------------------------------------------------------------------

/// Synthesizes a workspace and writes the reference frame the representation
/// options imply, so single sets can be featurized with it later.
inline GeneratedMetaset synthesize_workspace(const MetasetConfig& cfg, const RepresentationOptions& opts,
                                             const std::filesystem::path& workspace) {
  opts.check();
  cfg.check();
  GeneratedMetaset g = generate_sets(cfg, workspace);
  const ReferenceFrame frame = build_reference_frame(g.source, opts);
  atomic_write(workspace / g.manifest.frame_path, to_json(frame).dump());
  return g;
}

}  // namespace autoeval
