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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoeval/common.hpp"
#include "autoeval/error.hpp"
#include "autoeval/featureset.hpp"
#include "autoeval/json_util.hpp"
#include "autoeval/regress.hpp"

namespace autoeval {

// ---------------------------------------------------------------------------
// Toy source task: Gaussian classes with identity covariance.

struct ToyTaskConfig {
  int raw_dim = 32;
  int classes = 10;
  double separation = 6.0;  // RMS pairwise distance between class means
  int n_train = 5000;
  int n_test = 2000;

  void check() const {
    if (raw_dim < 2) fail(ErrorKind::kConfig, "raw_dim must be >= 2");
    if (classes < 2) fail(ErrorKind::kConfig, "classes must be >= 2");
    if (!(separation > 0.0)) fail(ErrorKind::kConfig, "separation must be > 0");
    if (n_train < classes || n_test < classes)
      fail(ErrorKind::kConfig, "train/test draws must hold at least one sample per class");
  }
};

struct ToyTask {
  ToyTaskConfig config;
  Matrix means;  // C x d_raw
  Matrix train_x;
  std::vector<int> train_y;
  Matrix test_x;
  std::vector<int> test_y;
};

inline ToyTask make_toy_task(const ToyTaskConfig& cfg, std::uint64_t seed) {
  cfg.check();
  ToyTask task;
  task.config = cfg;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  task.means.resize(cfg.classes, cfg.raw_dim);
  for (Eigen::Index i = 0; i < task.means.size(); ++i) task.means.data()[i] = normal(rng);
  double sum_sq = 0.0;
  int pairs = 0;
  for (int a = 0; a < cfg.classes; ++a)
    for (int b = a + 1; b < cfg.classes; ++b, ++pairs) sum_sq += (task.means.row(a) - task.means.row(b)).squaredNorm();
  task.means *= cfg.separation / std::sqrt(sum_sq / pairs);

  // Labels cycle through the classes so every class is present.
  auto draw = [&](int n, Matrix& x, std::vector<int>& y) {
    x.resize(n, cfg.raw_dim);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
      y[i] = i % cfg.classes;
      for (int j = 0; j < cfg.raw_dim; ++j) x(i, j) = task.means(y[i], j) + normal(rng);
    }
  };
  draw(cfg.n_train, task.train_x, task.train_y);
  draw(cfg.n_test, task.test_x, task.test_y);
  return task;
}

// ---------------------------------------------------------------------------
// Toy classifier: one leaky-rectifier hidden layer (the feature layer) and a
// softmax head.

struct ClassifierConfig {
  int hidden = 64;
  int epochs = 30;
  int batch_size = 64;
  double learning_rate = 1e-3;

  void check() const {
    if (hidden < 1 || epochs < 1 || batch_size < 1 || !(learning_rate > 0.0))
      fail(ErrorKind::kConfig, "classifier config values must be positive");
  }
};

struct ToyClassifier {
  Eigen::MatrixXd w1;  // d_raw x D
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // D x C
  Eigen::VectorXd b2;
  double clean_test_accuracy = 0.0;

  Eigen::Index feature_dim() const { return w1.cols(); }
  int classes() const { return static_cast<int>(w2.cols()); }

  Eigen::MatrixXd features(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd a = x * w1;
    a.rowwise() += b1.transpose();
    return a.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
  }

  static Eigen::MatrixXd softmax_rows(Eigen::MatrixXd logits) {
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      const double top = logits.row(i).maxCoeff();
      logits.row(i) = (logits.row(i).array() - top).exp();
      logits.row(i) /= logits.row(i).sum();
    }
    return logits;
  }

  Eigen::MatrixXd softmax_from_features(const Eigen::MatrixXd& h) const {
    Eigen::MatrixXd z = h * w2;
    z.rowwise() += b2.transpose();
    return softmax_rows(std::move(z));
  }
};

inline int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (Eigen::Index c = 1; c < row.size(); ++c)
    if (row[c] > row[best]) best = static_cast<int>(c);
  return best;
}

inline double round_to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

/// Runs the classifier on raw inputs. Features and softmax are rounded to
/// float32 so the in-memory set equals its stored form, and correctness is
/// judged on the rounded softmax (argmax, ties to the lowest class).
struct Observation {
  FeatureSet set;
  long correct = 0;
  long total = 0;
};

inline Observation observe(const ToyClassifier& clf, const Matrix& raw, const std::vector<int>& labels) {
  Observation obs;
  const Eigen::MatrixXd h = clf.features(raw);
  const Eigen::MatrixXd p = clf.softmax_from_features(h);
  obs.set.features = h.unaryExpr(&round_to_float);
  obs.set.softmax = Matrix(p.unaryExpr(&round_to_float));
  obs.set.labels = labels;
  obs.set.num_classes = clf.classes();
  obs.total = static_cast<long>(labels.size());
  for (Eigen::Index i = 0; i < obs.set.softmax->rows(); ++i)
    if (argmax_row(obs.set.softmax->row(i)) == labels[i]) ++obs.correct;
  return obs;
}

inline double accuracy_of(const ToyClassifier& clf, const Matrix& raw, const std::vector<int>& labels) {
  const Observation o = observe(clf, raw, labels);
  return static_cast<double>(o.correct) / static_cast<double>(o.total);
}

namespace detail {

inline ToyClassifier train_classifier_once(const ToyTask& task, const ClassifierConfig& cfg, double lr,
                                           std::uint64_t seed) {
  const int d_raw = task.config.raw_dim, hidden = cfg.hidden, classes = task.config.classes;
  std::mt19937_64 rng(seed);
  ToyClassifier clf;
  auto init = [&](Eigen::MatrixXd& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> u(-limit, limit);
    w.resize(fan_in, fan_out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  };
  init(clf.w1, d_raw, hidden);
  init(clf.w2, hidden, classes);
  clf.b1 = Eigen::VectorXd::Constant(hidden, kBiasInit);
  clf.b2 = Eigen::VectorXd::Zero(classes);

  std::vector<double*> params{clf.w1.data(), clf.b1.data(), clf.w2.data(), clf.b2.data()};
  std::vector<Eigen::Index> sizes{clf.w1.size(), clf.b1.size(), clf.w2.size(), clf.b2.size()};
  std::vector<Eigen::VectorXd> m, v;
  for (auto s : sizes) {
    m.push_back(Eigen::VectorXd::Zero(s));
    v.push_back(Eigen::VectorXd::Zero(s));
  }

  const Eigen::Index n = task.train_x.rows();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  long step = 0;
  Eigen::MatrixXd xb, onehot;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index bn = std::min<Eigen::Index>(cfg.batch_size, n - start);
      xb.resize(bn, d_raw);
      onehot = Eigen::MatrixXd::Zero(bn, classes);
      for (Eigen::Index r = 0; r < bn; ++r) {
        xb.row(r) = task.train_x.row(order[start + r]);
        onehot(r, task.train_y[order[start + r]]) = 1.0;
      }
      Eigen::MatrixXd a1 = xb * clf.w1;
      a1.rowwise() += clf.b1.transpose();
      const Eigen::MatrixXd h = a1.unaryExpr([](double t) { return t > 0.0 ? t : kLeakySlope * t; });
      const Eigen::MatrixXd p = clf.softmax_from_features(h);
      const Eigen::MatrixXd dz = (p - onehot) / static_cast<double>(bn);
      const Eigen::MatrixXd gw2 = h.transpose() * dz;
      const Eigen::VectorXd gb2 = dz.colwise().sum().transpose();
      Eigen::MatrixXd dh = dz * clf.w2.transpose();
      for (Eigen::Index i = 0; i < dh.size(); ++i)
        if (a1.data()[i] <= 0.0) dh.data()[i] *= kLeakySlope;
      const Eigen::MatrixXd gw1 = xb.transpose() * dh;
      const Eigen::VectorXd gb1 = dh.colwise().sum().transpose();
      const double* grads[] = {gw1.data(), gb1.data(), gw2.data(), gb2.data()};
      ++step;
      const double c1 = 1.0 - std::pow(0.9, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(0.999, static_cast<double>(step));
      for (std::size_t k = 0; k < params.size(); ++k)
        adam_update(params[k], m[k].data(), v[k].data(), grads[k], sizes[k], lr, 0.9, 0.999, 1e-8, c1, c2);
    }
  }
  clf.clean_test_accuracy = accuracy_of(clf, task.test_x, task.test_y);
  return clf;
}

}  // namespace detail

inline constexpr double kClassifierMinAccuracy = 0.8;

/// Cross-entropy training with Adam. A run below 80% clean test accuracy is
/// retried once at half the learning rate before giving up.
inline ToyClassifier train_toy_classifier(const ToyTask& task, std::uint64_t seed,
                                          const ClassifierConfig& cfg = {}) {
  cfg.check();
  ToyClassifier clf = detail::train_classifier_once(task, cfg, cfg.learning_rate, seed);
  if (clf.clean_test_accuracy >= kClassifierMinAccuracy) return clf;
  clf = detail::train_classifier_once(task, cfg, 0.5 * cfg.learning_rate, seed);
  if (clf.clean_test_accuracy < kClassifierMinAccuracy)
    fail(ErrorKind::kTraining, "toy classifier reached only " + std::to_string(clf.clean_test_accuracy) +
                                   " clean accuracy");
  return clf;
}

inline nlohmann::json to_json(const ToyClassifier& c) {
  using json_util::matrix_to_json;
  using json_util::vector_to_json;
  return {{"format", "autoeval-toy-classifier"},
          {"version", 1},
          {"clean_test_accuracy", c.clean_test_accuracy},
          {"w1", matrix_to_json(Matrix(c.w1))},
          {"b1", vector_to_json(c.b1)},
          {"w2", matrix_to_json(Matrix(c.w2))},
          {"b2", vector_to_json(c.b2)}};
}

// ---------------------------------------------------------------------------
// Distribution-shift transforms on raw inputs.

enum class Primitive { kAddNoise, kScale, kShift, kRotate, kDropDims, kClassPrior };

inline constexpr Primitive kAllPrimitives[] = {Primitive::kAddNoise, Primitive::kScale,    Primitive::kShift,
                                               Primitive::kRotate,   Primitive::kDropDims, Primitive::kClassPrior};

inline const char* to_string(Primitive p) {
  switch (p) {
    case Primitive::kAddNoise: return "ADD_NOISE";
    case Primitive::kScale: return "SCALE";
    case Primitive::kShift: return "SHIFT";
    case Primitive::kRotate: return "ROTATE";
    case Primitive::kDropDims: return "DROP_DIMS";
    case Primitive::kClassPrior: return "CLASS_PRIOR";
  }
  return "?";
}

inline Primitive primitive_from_string(const std::string& s) {
  for (Primitive p : kAllPrimitives)
    if (s == to_string(p)) return p;
  fail(ErrorKind::kSpec, "unknown transform primitive '" + s + "'");
}

struct Band {
  double lo = 0.0;
  double hi = 0.0;
};

// Full admissible parameter range of each primitive's magnitude.
inline Band admissible_range(Primitive p) {
  switch (p) {
    case Primitive::kAddNoise: return {0.1, 2.0};
    case Primitive::kScale: return {0.5, 1.8};
    case Primitive::kShift: return {0.2, 3.0};
    case Primitive::kRotate: return {5.0, 60.0};
    case Primitive::kDropDims: return {0.05, 0.4};
    case Primitive::kClassPrior: return {1.0, 1.0};
  }
  return {};
}

inline const char* magnitude_key(Primitive p) {
  switch (p) {
    case Primitive::kAddNoise: return "sigma";
    case Primitive::kScale: return "factor";
    case Primitive::kShift: return "magnitude";
    case Primitive::kRotate: return "angle_deg";
    case Primitive::kDropDims: return "fraction";
    case Primitive::kClassPrior: return "alpha";
  }
  return "value";
}

struct TransformStep {
  Primitive kind = Primitive::kAddNoise;
  double value = 0.0;  // sigma, factor, magnitude, angle in degrees, fraction, or Dirichlet alpha
  int pairs = 1;       // ROTATE: number of rotated 2-D planes
  std::uint64_t seed = 0;
};

struct TransformSpec {
  std::vector<TransformStep> steps;
};

inline constexpr std::size_t kMaxTransformSteps = 3;

inline void check_spec(const TransformSpec& spec, int raw_dim) {
  if (spec.steps.size() > kMaxTransformSteps) fail(ErrorKind::kSpec, "at most 3 primitives per transform");
  for (const auto& s : spec.steps) {
    const Band r = admissible_range(s.kind);
    if (!(s.value >= r.lo && s.value <= r.hi))
      fail(ErrorKind::kSpec, std::string(to_string(s.kind)) + " " + magnitude_key(s.kind) + "=" +
                                 std::to_string(s.value) + " outside [" + std::to_string(r.lo) + ", " +
                                 std::to_string(r.hi) + "]");
    if (s.kind == Primitive::kRotate && (s.pairs < 1 || s.pairs > raw_dim / 2))
      fail(ErrorKind::kSpec, "ROTATE pairs must lie in [1, d_raw/2]");
  }
}

inline nlohmann::json to_json(const TransformSpec& spec) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : spec.steps) {
    nlohmann::json j = {{"kind", to_string(s.kind)}, {magnitude_key(s.kind), s.value}, {"seed", s.seed}};
    if (s.kind == Primitive::kRotate) j["pairs"] = s.pairs;
    steps.push_back(std::move(j));
  }
  return steps;
}

inline TransformSpec spec_from_json(const nlohmann::json& j) {
  using json_util::field;
  if (!j.is_array()) fail(ErrorKind::kFormat, "transform spec must be an array");
  TransformSpec spec;
  for (const auto& item : j) {
    TransformStep s;
    s.kind = primitive_from_string(field<std::string>(item, "kind", "transform step"));
    s.value = field<double>(item, magnitude_key(s.kind), "transform step");
    s.seed = field<std::uint64_t>(item, "seed", "transform step");
    if (s.kind == Primitive::kRotate) s.pairs = field<int>(item, "pairs", "transform step");
    spec.steps.push_back(s);
  }
  return spec;
}

struct TransformedData {
  Matrix raw;
  std::vector<int> labels;
};

/// Applies the steps in order. Each step draws from its own seed, so a spec
/// replays bit-identically.
inline TransformedData apply_transform(const Matrix& raw, const std::vector<int>& labels,
                                       const TransformSpec& spec, int classes) {
  check_spec(spec, static_cast<int>(raw.cols()));
  if (static_cast<Eigen::Index>(labels.size()) != raw.rows())
    fail(ErrorKind::kDimension, "transform: label count differs from row count");
  TransformedData out{raw, labels};
  const Eigen::Index n = raw.rows(), d = raw.cols();
  for (const auto& step : spec.steps) {
    std::mt19937_64 rng(step.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    switch (step.kind) {
      case Primitive::kAddNoise:
        for (Eigen::Index i = 0; i < out.raw.size(); ++i) out.raw.data()[i] += step.value * normal(rng);
        break;
      case Primitive::kScale:
        out.raw *= step.value;
        break;
      case Primitive::kShift: {
        Eigen::RowVectorXd u(d);
        for (Eigen::Index j = 0; j < d; ++j) u[j] = normal(rng);
        u.normalize();
        out.raw.rowwise() += step.value * u;
        break;
      }
      case Primitive::kRotate: {
        Eigen::MatrixXd g(d, d);
        for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
        const double theta = step.value * std::numbers::pi / 180.0;
        Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(d, d);
        for (int p = 0; p < step.pairs; ++p) {
          const Eigen::VectorXd a = q.col(2 * p), b = q.col(2 * p + 1);
          rot += (std::cos(theta) - 1.0) * (a * a.transpose() + b * b.transpose()) +
                 std::sin(theta) * (b * a.transpose() - a * b.transpose());
        }
        out.raw = out.raw * rot.transpose();
        break;
      }
      case Primitive::kDropDims: {
        const int count = std::max(1, static_cast<int>(std::lround(step.value * static_cast<double>(d))));
        std::vector<Eigen::Index> dims(d);
        std::iota(dims.begin(), dims.end(), Eigen::Index{0});
        std::shuffle(dims.begin(), dims.end(), rng);
        for (int k = 0; k < count; ++k) out.raw.col(dims[k]).setZero();
        break;
      }
      case Primitive::kClassPrior: {
        std::vector<std::vector<Eigen::Index>> members(classes);
        for (Eigen::Index i = 0; i < n; ++i) members.at(out.labels[i]).push_back(i);
        std::gamma_distribution<double> gamma(step.value, 1.0);
        std::vector<double> weights(classes);
        for (int c = 0; c < classes; ++c) weights[c] = members[c].empty() ? 0.0 : gamma(rng);
        if (std::all_of(weights.begin(), weights.end(), [](double w) { return w <= 0.0; }))
          for (int c = 0; c < classes; ++c) weights[c] = members[c].empty() ? 0.0 : 1.0;
        std::discrete_distribution<int> pick_class(weights.begin(), weights.end());
        Matrix resampled(n, d);
        std::vector<int> new_labels(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          const int c = pick_class(rng);
          const auto& rows = members[c];
          const Eigen::Index src = rows[std::uniform_int_distribution<std::size_t>(0, rows.size() - 1)(rng)];
          resampled.row(i) = out.raw.row(src);
          new_labels[i] = c;
        }
        out.raw = std::move(resampled);
        out.labels = std::move(new_labels);
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Meta-set generation.

enum class Split { kTrainMeta, kValMeta, kTestMeta };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::kTrainMeta: return "TRAIN_META";
    case Split::kValMeta: return "VAL_META";
    case Split::kTestMeta: return "TEST_META";
  }
  return "?";
}

inline Split split_from_string(const std::string& s) {
  for (Split sp : {Split::kTrainMeta, Split::kValMeta, Split::kTestMeta})
    if (s == to_string(sp)) return sp;
  fail(ErrorKind::kFormat, "unknown split '" + s + "'");
}

// Magnitude bands per primitive. CLASS_PRIOR has no magnitude band.
struct ParamBands {
  std::vector<Band> noise, scale, shift, angle, drop;

  const std::vector<Band>& of(Primitive p) const {
    switch (p) {
      case Primitive::kAddNoise: return noise;
      case Primitive::kScale: return scale;
      case Primitive::kShift: return shift;
      case Primitive::kRotate: return angle;
      case Primitive::kDropDims: return drop;
      case Primitive::kClassPrior: break;
    }
    fail(ErrorKind::kConfig, "CLASS_PRIOR has no magnitude bands");
  }
  std::vector<Band>& of(Primitive p) { return const_cast<std::vector<Band>&>(std::as_const(*this).of(p)); }
};

// Cuts the admissible range into seven equal bands; even bands go to the
// sample-set side, odd bands (shrunk by 5% of a band on each end) to the
// test side. Test magnitudes therefore never coincide with sample-set ones.
inline void interleaved_bands(Primitive p, ParamBands& train, ParamBands& test) {
  const Band r = admissible_range(p);
  const double w = (r.hi - r.lo) / 7.0;
  for (int k = 0; k < 7; ++k) {
    const double lo = r.lo + k * w, hi = k == 6 ? r.hi : r.lo + (k + 1) * w;
    if (k % 2 == 0) train.of(p).push_back({lo, hi});
    else test.of(p).push_back({lo + 0.05 * w, hi - 0.05 * w});
  }
}

struct MetasetConfig {
  ToyTaskConfig task;
  ClassifierConfig classifier;
  int n_train_meta = 200;
  int n_val_meta = 50;
  int n_test_meta = 50;
  std::uint64_t seed = 0;
  ParamBands sample_bands;  // TRAIN_META and VAL_META
  ParamBands test_bands;    // TEST_META

  MetasetConfig() {
    for (Primitive p : kAllPrimitives)
      if (p != Primitive::kClassPrior) interleaved_bands(p, sample_bands, test_bands);
  }

  void check() const {
    task.check();
    classifier.check();
    if (n_train_meta < 1) fail(ErrorKind::kConfig, "n-train must be ≥ 1");
    if (n_val_meta < 1) fail(ErrorKind::kConfig, "n-val must be ≥ 1");
    if (n_test_meta < 1) fail(ErrorKind::kConfig, "n-test must be ≥ 1");
    for (Primitive p : kAllPrimitives) {
      if (p == Primitive::kClassPrior) continue;
      const Band r = admissible_range(p);
      for (const auto* side : {&sample_bands, &test_bands}) {
        if (side->of(p).empty()) fail(ErrorKind::kConfig, std::string(to_string(p)) + " has an empty band list");
        for (const Band& b : side->of(p))
          if (!(b.lo <= b.hi && b.lo >= r.lo && b.hi <= r.hi))
            fail(ErrorKind::kConfig, std::string(to_string(p)) + " band outside the admissible range");
      }
      for (const Band& a : sample_bands.of(p))
        for (const Band& b : test_bands.of(p))
          if (a.lo <= b.hi && b.lo <= a.hi)
            fail(ErrorKind::kConfig, std::string(to_string(p)) + " sample-set and test-set bands overlap");
    }
  }
};

inline nlohmann::json bands_to_json(const ParamBands& b) {
  nlohmann::json j;
  for (Primitive p : kAllPrimitives) {
    if (p == Primitive::kClassPrior) continue;
    nlohmann::json list = nlohmann::json::array();
    for (const Band& band : b.of(p)) list.push_back({band.lo, band.hi});
    j[to_string(p)] = std::move(list);
  }
  return j;
}

inline void merge_bands(ParamBands& b, const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kConfig, "bands must be a JSON object");
  for (const auto& [key, val] : j.items()) {
    Primitive p;
    try {
      p = primitive_from_string(key);
    } catch (const Error&) {
      fail(ErrorKind::kConfig, "unknown band primitive '" + key + "'");
    }
    if (p == Primitive::kClassPrior) fail(ErrorKind::kConfig, "CLASS_PRIOR has no magnitude bands");
    std::vector<Band> bands;
    try {
      for (const auto& pair : val) bands.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kConfig, "band list for " + key + ": " + e.what());
    }
    b.of(p) = std::move(bands);
  }
}

inline nlohmann::json to_json(const MetasetConfig& c) {
  return {{"task",
           {{"raw_dim", c.task.raw_dim},
            {"classes", c.task.classes},
            {"separation", c.task.separation},
            {"n_train", c.task.n_train},
            {"n_test", c.task.n_test}}},
          {"classifier",
           {{"hidden", c.classifier.hidden},
            {"epochs", c.classifier.epochs},
            {"batch_size", c.classifier.batch_size},
            {"learning_rate", c.classifier.learning_rate}}},
          {"n_train_meta", c.n_train_meta},
          {"n_val_meta", c.n_val_meta},
          {"n_test_meta", c.n_test_meta},
          {"seed", c.seed},
          {"sample_bands", bands_to_json(c.sample_bands)},
          {"test_bands", bands_to_json(c.test_bands)}};
}

inline void merge_json(MetasetConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kConfig, "metaset config must be a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "task") {
        for (const auto& [k, v] : val.items()) {
          if (k == "raw_dim") c.task.raw_dim = v.get<int>();
          else if (k == "classes") c.task.classes = v.get<int>();
          else if (k == "separation") c.task.separation = v.get<double>();
          else if (k == "n_train") c.task.n_train = v.get<int>();
          else if (k == "n_test") c.task.n_test = v.get<int>();
          else fail(ErrorKind::kConfig, "unknown task option '" + k + "'");
        }
      } else if (key == "classifier") {
        for (const auto& [k, v] : val.items()) {
          if (k == "hidden") c.classifier.hidden = v.get<int>();
          else if (k == "epochs") c.classifier.epochs = v.get<int>();
          else if (k == "batch_size") c.classifier.batch_size = v.get<int>();
          else if (k == "learning_rate") c.classifier.learning_rate = v.get<double>();
          else fail(ErrorKind::kConfig, "unknown classifier option '" + k + "'");
        }
      } else if (key == "n_train_meta") c.n_train_meta = val.get<int>();
      else if (key == "n_val_meta") c.n_val_meta = val.get<int>();
      else if (key == "n_test_meta") c.n_test_meta = val.get<int>();
      else if (key == "seed") c.seed = val.get<std::uint64_t>();
      else if (key == "sample_bands") merge_bands(c.sample_bands, val);
      else if (key == "test_bands") merge_bands(c.test_bands, val);
      else fail(ErrorKind::kConfig, "unknown metaset option '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("metaset config: ") + e.what());
  }
}

struct SampleSetRecord {
  int index = 0;
  Split split = Split::kTrainMeta;
  std::string path;  // relative to the workspace
  TransformSpec spec;
  long correct = 0;
  long total = 0;

  double accuracy() const { return static_cast<double>(correct) / static_cast<double>(total); }
};

/// Draws a transform for one record: 1-3 distinct primitives, each
/// magnitude drawn uniformly from a band of the given side.
inline TransformSpec draw_spec(const ParamBands& bands, int raw_dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Primitive> kinds(std::begin(kAllPrimitives), std::end(kAllPrimitives));
  std::shuffle(kinds.begin(), kinds.end(), rng);
  const int count = std::uniform_int_distribution<int>(1, static_cast<int>(kMaxTransformSteps))(rng);
  TransformSpec spec;
  for (int k = 0; k < count; ++k) {
    TransformStep s;
    s.kind = kinds[k];
    if (s.kind == Primitive::kClassPrior) {
      s.value = 1.0;
    } else {
      const auto& list = bands.of(s.kind);
      std::vector<double> widths;
      for (const Band& b : list) widths.push_back(std::max(b.hi - b.lo, 1e-12));
      const Band& b = list[std::discrete_distribution<std::size_t>(widths.begin(), widths.end())(rng)];
      s.value = std::uniform_real_distribution<double>(b.lo, b.hi)(rng);
    }
    if (s.kind == Primitive::kRotate) s.pairs = std::uniform_int_distribution<int>(1, raw_dim / 2)(rng);
    s.seed = rng();
    spec.steps.push_back(s);
  }
  return spec;
}

inline Observation make_sample_set(const ToyClassifier& clf, const ToyTask& task, const TransformSpec& spec) {
  const TransformedData t = apply_transform(task.test_x, task.test_y, spec, task.config.classes);
  return observe(clf, t.raw, t.labels);
}

struct Manifest {
  std::uint64_t seed = 0;
  nlohmann::json config;
  double clean_test_accuracy = 0.0;
  std::string source_path = "source.fset";
  std::string frame_path = "frame.json";
  std::vector<SampleSetRecord> records;
};

inline nlohmann::json to_json(const Manifest& m) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : m.records) {
    records.push_back({{"index", r.index},
                       {"split", to_string(r.split)},
                       {"path", r.path},
                       {"spec", to_json(r.spec)},
                       {"accuracy", {{"correct", r.correct}, {"total", r.total}, {"value", r.accuracy()}}}});
  }
  return {{"format", "autoeval-manifest"},
          {"version", 1},
          {"seed", m.seed},
          {"config", m.config},
          {"clean_test_accuracy", m.clean_test_accuracy},
          {"source", m.source_path},
          {"frame", m.frame_path},
          {"records", std::move(records)}};
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  using json_util::field;
  const std::string what = "manifest";
  if (field<std::string>(j, "format", what) != "autoeval-manifest" || field<int>(j, "version", what) != 1)
    fail(ErrorKind::kFormat, "not a version-1 manifest");
  Manifest m;
  m.seed = field<std::uint64_t>(j, "seed", what);
  m.config = field<nlohmann::json>(j, "config", what);
  m.clean_test_accuracy = field<double>(j, "clean_test_accuracy", what);
  m.source_path = field<std::string>(j, "source", what);
  m.frame_path = field<std::string>(j, "frame", what);
  for (const auto& r : field<nlohmann::json>(j, "records", what)) {
    SampleSetRecord rec;
    rec.index = field<int>(r, "index", "record");
    rec.split = split_from_string(field<std::string>(r, "split", "record"));
    rec.path = field<std::string>(r, "path", "record");
    rec.spec = spec_from_json(field<nlohmann::json>(r, "spec", "record"));
    const auto acc = field<nlohmann::json>(r, "accuracy", "record");
    rec.correct = field<long>(acc, "correct", "record accuracy");
    rec.total = field<long>(acc, "total", "record accuracy");
    if (rec.total < 1 || rec.correct < 0 || rec.correct > rec.total)
      fail(ErrorKind::kFormat, "record " + std::to_string(rec.index) + " has an invalid accuracy fraction");
    m.records.push_back(std::move(rec));
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& workspace) {
  const auto path = workspace / "manifest.json";
  if (!std::filesystem::exists(path)) fail(ErrorKind::kWorkspace, "no manifest at " + path.string());
  return manifest_from_json(json_util::parse(read_file(path), path.string()));
}

inline std::string record_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sets/set_%05d.fset", index);
  return buf;
}

inline void write_manifest(const Manifest& m, const std::filesystem::path& workspace) {
  atomic_write(workspace / "manifest.json", to_json(m).dump(2));
}

struct GeneratedMetaset {
  ToyTask task;
  ToyClassifier classifier;
  FeatureSet source;  // classifier output on the clean training draw
  Manifest manifest;
};

/// Builds the toy task and classifier, then synthesizes every sample and
/// test set into `workspace`: one FSET file per record, the labelled source
/// set, and manifest.json (written last).
inline GeneratedMetaset generate_sets(const MetasetConfig& cfg, const std::filesystem::path& workspace) {
  cfg.check();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(workspace / "sets", ec);
  if (ec) fail(ErrorKind::kIo, "cannot create workspace " + workspace.string() + ": " + ec.message());

  GeneratedMetaset out;
  out.task = make_toy_task(cfg.task, mix_seed(cfg.seed, 1));
  out.classifier = train_toy_classifier(out.task, mix_seed(cfg.seed, 2), cfg.classifier);
  {
    Observation src = observe(out.classifier, out.task.train_x, out.task.train_y);
    src.set.source_id = "source";
    out.source = std::move(src.set);
  }
  save(out.source, workspace / out.manifest.source_path);
  atomic_write(workspace / "classifier.json", to_json(out.classifier).dump());

  out.manifest.seed = cfg.seed;
  out.manifest.config = to_json(cfg);
  out.manifest.clean_test_accuracy = out.classifier.clean_test_accuracy;
  const int total = cfg.n_train_meta + cfg.n_val_meta + cfg.n_test_meta;
  for (int i = 0; i < total; ++i) {
    SampleSetRecord rec;
    rec.index = i;
    rec.split = i < cfg.n_train_meta ? Split::kTrainMeta
                : i < cfg.n_train_meta + cfg.n_val_meta ? Split::kValMeta
                                                        : Split::kTestMeta;
    const ParamBands& bands = rec.split == Split::kTestMeta ? cfg.test_bands : cfg.sample_bands;
    rec.spec = draw_spec(bands, cfg.task.raw_dim, mix_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(i)));
    Observation obs = make_sample_set(out.classifier, out.task, rec.spec);
    rec.path = record_file_name(i);
    rec.correct = obs.correct;
    rec.total = obs.total;
    save(obs.set, workspace / rec.path);
    out.manifest.records.push_back(std::move(rec));
  }
  write_manifest(out.manifest, workspace);
  return out;
}

}  // namespace autoeval
