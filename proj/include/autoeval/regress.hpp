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
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoeval/common.hpp"
#include "autoeval/error.hpp"
#include "autoeval/json_util.hpp"

namespace autoeval {

inline constexpr double kLeakySlope = 0.01;
inline constexpr double kBiasInit = 0.01;
// fit() starts the output at the logit of the mean target, clamped to
// [kTargetClamp, 1 - kTargetClamp].
inline constexpr double kTargetClamp = 1e-3;

struct DenseLayer {
  Eigen::MatrixXd weight;  // fan_in x fan_out
  Eigen::VectorXd bias;    // fan_out
};

/// Fully connected accuracy regressor: leaky-rectifier hidden layers and a
/// logistic output, applied to standardized inputs.
struct RegressorModel {
  std::vector<int> dims;  // [input, hidden..., 1]
  std::vector<DenseLayer> layers;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_scale;

  int input_dim() const { return dims.front(); }

  std::size_t parameter_count() const {
    std::size_t total = 0;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i)
      total += static_cast<std::size_t>(dims[i]) * dims[i + 1] + dims[i + 1];
    return total;
  }

  static RegressorModel zeros(std::vector<int> dims) {
    check_dims(dims);
    RegressorModel m;
    m.dims = std::move(dims);
    for (std::size_t i = 0; i + 1 < m.dims.size(); ++i)
      m.layers.push_back({Eigen::MatrixXd::Zero(m.dims[i], m.dims[i + 1]), Eigen::VectorXd::Zero(m.dims[i + 1])});
    m.input_mean = Eigen::VectorXd::Zero(m.dims.front());
    m.input_scale = Eigen::VectorXd::Ones(m.dims.front());
    return m;
  }

  // He-uniform weights for the leaky rectifier, small positive biases.
  static RegressorModel initialized(std::vector<int> dims, std::uint64_t seed) {
    RegressorModel m = zeros(std::move(dims));
    std::mt19937_64 rng(seed);
    for (auto& layer : m.layers) {
      const double limit = std::sqrt(6.0 / static_cast<double>(layer.weight.rows()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = u(rng);
      layer.bias.setConstant(kBiasInit);
    }
    return m;
  }

  static void check_dims(const std::vector<int>& dims) {
    if (dims.size() < 2) fail(ErrorKind::kConfig, "regressor needs at least input and output layers");
    for (int d : dims)
      if (d < 1) fail(ErrorKind::kConfig, "regressor layer widths must be >= 1");
    if (dims.back() != 1) fail(ErrorKind::kConfig, "regressor output width must be 1");
  }

  // Rows of `x` are raw representations.
  Eigen::VectorXd predict_batch(const Eigen::MatrixXd& x) const {
    if (x.cols() != input_dim())
      fail(ErrorKind::kDimension, "representation length " + std::to_string(x.cols()) +
                                      " does not match model input " + std::to_string(input_dim()));
    if (!x.allFinite()) fail(ErrorKind::kInput, "representation has non-finite entries");
    Eigen::MatrixXd h = standardize(x);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      Eigen::MatrixXd a = h * layers[l].weight;
      a.rowwise() += layers[l].bias.transpose();
      if (l + 1 < layers.size()) h = a.unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; });
      else h = std::move(a);
    }
    return h.col(0).unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
  }

  double predict(const Eigen::VectorXd& rep) const {
    if (rep.size() != input_dim())
      fail(ErrorKind::kDimension, "representation length " + std::to_string(rep.size()) +
                                      " does not match model input " + std::to_string(input_dim()));
    return predict_batch(rep.transpose())(0);
  }

  Eigen::MatrixXd standardize(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - input_mean.transpose()).array().rowwise() / input_scale.transpose().array();
  }
};

namespace detail {

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

// Mean squared error of the batch and, if `grads` is given, its gradient.
// `z` is the already standardized input.
inline double loss_and_gradient(const RegressorModel& m, const Eigen::MatrixXd& z, const Eigen::VectorXd& target,
                                Gradients* grads) {
  const std::size_t depth = m.layers.size();
  const double n = static_cast<double>(z.rows());
  std::vector<Eigen::MatrixXd> acts;  // inputs to each layer
  std::vector<Eigen::MatrixXd> pre;   // pre-activations of each layer
  acts.reserve(depth);
  pre.reserve(depth);
  acts.push_back(z);
  for (std::size_t l = 0; l < depth; ++l) {
    Eigen::MatrixXd a = acts.back() * m.layers[l].weight;
    a.rowwise() += m.layers[l].bias.transpose();
    pre.push_back(std::move(a));
    if (l + 1 < depth)
      acts.push_back(pre.back().unaryExpr([](double v) { return v > 0.0 ? v : kLeakySlope * v; }));
  }
  const Eigen::VectorXd y = pre.back().col(0).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  const Eigen::VectorXd err = y - target;
  const double loss = err.squaredNorm() / n;
  if (!grads) return loss;

  grads->weight.resize(depth);
  grads->bias.resize(depth);
  Eigen::MatrixXd delta = ((2.0 / n) * err.array() * y.array() * (1.0 - y.array())).matrix();
  for (std::size_t l = depth; l-- > 0;) {
    grads->weight[l].noalias() = acts[l].transpose() * delta;
    grads->bias[l] = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd back = delta * m.layers[l].weight.transpose();
    const Eigen::MatrixXd& a = pre[l - 1];
    for (Eigen::Index i = 0; i < back.size(); ++i)
      if (a.data()[i] <= 0.0) back.data()[i] *= kLeakySlope;
    delta = std::move(back);
  }
  return loss;
}

}  // namespace detail

struct TrainConfig {
  std::vector<int> hidden{512, 128};
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // used when no explicit validation pairs are given

  void check() const {
    if (epochs < 1) fail(ErrorKind::kConfig, "epochs must be >= 1");
    if (!(learning_rate > 0.0)) fail(ErrorKind::kConfig, "learning rate must be > 0");
    if (batch_size < 1) fail(ErrorKind::kConfig, "batch size must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      fail(ErrorKind::kConfig, "validation fraction must lie in (0,1)");
    for (int h : hidden)
      if (h < 1) fail(ErrorKind::kConfig, "hidden widths must be >= 1");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"hidden", c.hidden},           {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},             {"beta2", c.beta2},
          {"epsilon", c.epsilon},         {"batch_size", c.batch_size},
          {"epochs", c.epochs},           {"seed", c.seed},
          {"validation_fraction", c.validation_fraction}};
}

inline void merge_json(TrainConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kConfig, "train config must be a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "hidden") c.hidden = val.get<std::vector<int>>();
      else if (key == "learning_rate") c.learning_rate = val.get<double>();
      else if (key == "beta1") c.beta1 = val.get<double>();
      else if (key == "beta2") c.beta2 = val.get<double>();
      else if (key == "epsilon") c.epsilon = val.get<double>();
      else if (key == "batch_size") c.batch_size = val.get<int>();
      else if (key == "epochs") c.epochs = val.get<int>();
      else if (key == "seed") c.seed = val.get<std::uint64_t>();
      else if (key == "validation_fraction") c.validation_fraction = val.get<double>();
      else fail(ErrorKind::kConfig, "unknown train option '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("train config: ") + e.what());
  }
  c.check();
}

/// Supervision for the regressor: one representation per row, one accuracy each.
struct TrainingPairs {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;

  Eigen::Index size() const { return inputs.rows(); }
};

struct FitResult {
  RegressorModel model;
  double initial_train_loss = 0.0;
  std::vector<double> train_loss;  // mean minibatch loss of each epoch
  std::vector<double> val_loss;
  int best_epoch = 0;  // 1-based
};

namespace detail {

inline void check_pairs(const TrainingPairs& p, const char* what) {
  if (p.inputs.rows() != p.targets.size())
    fail(ErrorKind::kInput, std::string(what) + ": input and target counts differ");
  if (!p.inputs.allFinite()) fail(ErrorKind::kInput, std::string(what) + ": non-finite representation entry");
  for (Eigen::Index i = 0; i < p.targets.size(); ++i)
    if (!(p.targets[i] >= 0.0 && p.targets[i] <= 1.0))
      fail(ErrorKind::kInput, std::string(what) + ": accuracy outside [0,1]");
}

// Order by (target, representation) so training ignores how pairs were listed.
inline TrainingPairs canonical_pairs(const TrainingPairs& p) {
  std::vector<Eigen::Index> idx(p.size());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  const Eigen::Index cols = p.inputs.cols();
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (p.targets[a] != p.targets[b]) return p.targets[a] < p.targets[b];
    for (Eigen::Index c = 0; c < cols; ++c)
      if (p.inputs(a, c) != p.inputs(b, c)) return p.inputs(a, c) < p.inputs(b, c);
    return false;
  });
  TrainingPairs out{Eigen::MatrixXd(p.size(), cols), Eigen::VectorXd(p.size())};
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    out.inputs.row(i) = p.inputs.row(idx[i]);
    out.targets[i] = p.targets[idx[i]];
  }
  return out;
}

inline TrainingPairs take_rows(const TrainingPairs& p, const std::vector<Eigen::Index>& rows) {
  TrainingPairs out{Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), p.inputs.cols()),
                    Eigen::VectorXd(static_cast<Eigen::Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.inputs.row(static_cast<Eigen::Index>(i)) = p.inputs.row(rows[i]);
    out.targets[static_cast<Eigen::Index>(i)] = p.targets[rows[i]];
  }
  return out;
}

// One Adam step; c1, c2 are the bias corrections 1 - beta^t.
inline void adam_update(double* param, double* m, double* v, const double* grad, Eigen::Index n, double lr,
                        double b1, double b2, double eps, double c1, double c2) {
  const double step = lr / c1;
  const double inv_c2 = 1.0 / c2;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = grad[i];
    const double mi = b1 * m[i] + (1.0 - b1) * g;
    const double vi = b2 * v[i] + (1.0 - b2) * g * g;
    m[i] = mi;
    v[i] = vi;
    param[i] -= step * mi / (std::sqrt(vi * inv_c2) + eps);
  }
}

}  // namespace detail

// Mean squared error of the model over a set of pairs.
inline double mse(const RegressorModel& model, const TrainingPairs& pairs) {
  const Eigen::VectorXd y = model.predict_batch(pairs.inputs);
  return (y - pairs.targets).squaredNorm() / static_cast<double>(pairs.size());
}

/// Trains the regressor with Adam on mean squared error and returns the
/// epoch with the lowest validation loss. Without explicit validation pairs,
/// a seeded fraction of `train` is held out.
inline FitResult fit(const TrainingPairs& train_in, const TrainConfig& cfg,
                     const std::optional<TrainingPairs>& validation = std::nullopt) {
  cfg.check();
  detail::check_pairs(train_in, "training pairs");
  if (train_in.size() < 2) fail(ErrorKind::kInput, "fit needs at least 2 pairs");
  if (train_in.inputs.cols() < 1) fail(ErrorKind::kInput, "representations are empty");

  TrainingPairs train = detail::canonical_pairs(train_in);
  TrainingPairs val;
  if (validation) {
    detail::check_pairs(*validation, "validation pairs");
    if (validation->size() < 1) fail(ErrorKind::kInput, "validation set is empty");
    if (validation->inputs.cols() != train.inputs.cols())
      fail(ErrorKind::kInput, "validation representation length differs from training");
    val = *validation;
  } else {
    std::vector<Eigen::Index> order(train.size());
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 split_rng(mix_seed(cfg.seed, 3));
    std::shuffle(order.begin(), order.end(), split_rng);
    auto n_val = static_cast<Eigen::Index>(std::llround(cfg.validation_fraction * train.size()));
    n_val = std::clamp<Eigen::Index>(n_val, 1, train.size() - 1);
    std::vector<Eigen::Index> val_rows(order.begin(), order.begin() + n_val);
    std::vector<Eigen::Index> train_rows(order.begin() + n_val, order.end());
    std::sort(val_rows.begin(), val_rows.end());
    std::sort(train_rows.begin(), train_rows.end());
    val = detail::take_rows(train, val_rows);
    train = detail::take_rows(train, train_rows);
  }

  std::vector<int> dims{static_cast<int>(train.inputs.cols())};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(1);
  RegressorModel model = RegressorModel::initialized(dims, mix_seed(cfg.seed, 1));
  model.input_mean = train.inputs.colwise().mean().transpose();
  {
    const Eigen::MatrixXd centered = train.inputs.rowwise() - model.input_mean.transpose();
    Eigen::VectorXd sd = (centered.colwise().squaredNorm() / static_cast<double>(train.size())).cwiseSqrt().transpose();
    for (Eigen::Index i = 0; i < sd.size(); ++i)
      if (!(sd[i] > 1e-12)) sd[i] = 1.0;
    // The extra sqrt(in) keeps the first layer's pre-activations O(1) under
    // Adam's per-weight steps when the input has thousands of entries.
    model.input_scale = sd * std::sqrt(static_cast<double>(sd.size()));
  }
  {
    const double mean_target = std::clamp(train.targets.mean(), kTargetClamp, 1.0 - kTargetClamp);
    model.layers.back().bias.setConstant(std::log(mean_target / (1.0 - mean_target)));
  }
  const Eigen::MatrixXd z_train = model.standardize(train.inputs);
  const Eigen::MatrixXd z_val = model.standardize(val.inputs);

  FitResult res;
  res.initial_train_loss = detail::loss_and_gradient(model, z_train, train.targets, nullptr);
  double best_val = std::numeric_limits<double>::infinity();
  RegressorModel best = model;

  const std::size_t depth = model.layers.size();
  std::vector<Eigen::MatrixXd> m_w(depth), v_w(depth);
  std::vector<Eigen::VectorXd> m_b(depth), v_b(depth);
  for (std::size_t l = 0; l < depth; ++l) {
    m_w[l] = v_w[l] = Eigen::MatrixXd::Zero(model.layers[l].weight.rows(), model.layers[l].weight.cols());
    m_b[l] = v_b[l] = Eigen::VectorXd::Zero(model.layers[l].bias.size());
  }
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, 2));
  std::vector<Eigen::Index> order(train.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  long step = 0;
  detail::Gradients g;
  Eigen::MatrixXd zb;
  Eigen::VectorXd tb;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto bn = static_cast<Eigen::Index>(stop - start);
      zb.resize(bn, z_train.cols());
      tb.resize(bn);
      for (Eigen::Index r = 0; r < bn; ++r) {
        zb.row(r) = z_train.row(order[start + r]);
        tb[r] = train.targets[order[start + r]];
      }
      epoch_loss += detail::loss_and_gradient(model, zb, tb, &g) * static_cast<double>(bn);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < depth; ++l) {
        detail::adam_update(model.layers[l].weight.data(), m_w[l].data(), v_w[l].data(), g.weight[l].data(),
                            model.layers[l].weight.size(), cfg.learning_rate, cfg.beta1, cfg.beta2,
                            cfg.epsilon, c1, c2);
        detail::adam_update(model.layers[l].bias.data(), m_b[l].data(), v_b[l].data(), g.bias[l].data(),
                            model.layers[l].bias.size(), cfg.learning_rate, cfg.beta1, cfg.beta2,
                            cfg.epsilon, c1, c2);
      }
    }
    const double tl = epoch_loss / static_cast<double>(train.size());
    const double vl = detail::loss_and_gradient(model, z_val, val.targets, nullptr);
    if (!std::isfinite(tl) || !std::isfinite(vl))
      fail(ErrorKind::kNumeric, "non-finite loss at epoch " + std::to_string(epoch));
    res.train_loss.push_back(tl);
    res.val_loss.push_back(vl);
    if (vl < best_val) {
      best_val = vl;
      best = model;
      res.best_epoch = epoch;
    }
  }
  res.model = std::move(best);
  return res;
}

/// Maximum relative error between analytic and central-difference gradients
/// of the single-example squared error, over a seeded subsample of at least
/// `min_params` parameters (all of them when the model is smaller).
inline double gradient_check(const RegressorModel& model, const Eigen::VectorXd& rep, double target,
                             std::uint64_t seed = 0, std::size_t min_params = 200, double step = 1e-5) {
  if (rep.size() != model.input_dim()) fail(ErrorKind::kDimension, "gradient check: representation length");
  const Eigen::MatrixXd z = model.standardize(rep.transpose());
  Eigen::VectorXd t(1);
  t[0] = target;
  detail::Gradients g;
  detail::loss_and_gradient(model, z, t, &g);

  // Flat parameter addressing: per layer, weights then bias.
  struct Slot {
    std::size_t layer;
    bool is_bias;
    Eigen::Index index;
  };
  std::vector<Slot> slots;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (Eigen::Index i = 0; i < model.layers[l].weight.size(); ++i) slots.push_back({l, false, i});
    for (Eigen::Index i = 0; i < model.layers[l].bias.size(); ++i) slots.push_back({l, true, i});
  }
  if (slots.size() > min_params) {
    std::mt19937_64 rng(seed);
    std::shuffle(slots.begin(), slots.end(), rng);
    slots.resize(min_params);
  }

  RegressorModel probe = model;
  double worst = 0.0;
  for (const Slot& s : slots) {
    double& p = s.is_bias ? probe.layers[s.layer].bias[s.index] : probe.layers[s.layer].weight.data()[s.index];
    const double saved = p;
    p = saved + step;
    const double up = detail::loss_and_gradient(probe, z, t, nullptr);
    p = saved - step;
    const double down = detail::loss_and_gradient(probe, z, t, nullptr);
    p = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double analytic = s.is_bias ? g.bias[s.layer][s.index] : g.weight[s.layer].data()[s.index];
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  }
  return worst;
}

inline nlohmann::json to_json(const RegressorModel& m) {
  using nlohmann::json;
  json layers = json::array();
  for (const auto& layer : m.layers) {
    // Weights flattened row-major: entry (i, j) at i * fan_out + j.
    std::vector<double> w(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
        w[static_cast<std::size_t>(i * layer.weight.cols() + j)] = layer.weight(i, j);
    layers.push_back({{"weight", std::move(w)},
                      {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  }
  return {{"format", "autoeval-regressor"},
          {"version", 1},
          {"dims", m.dims},
          {"activation", {{"hidden", "leaky_relu"}, {"slope", kLeakySlope}, {"output", "logistic"}}},
          {"input_mean", json_util::vector_to_json(m.input_mean)},
          {"input_scale", json_util::vector_to_json(m.input_scale)},
          {"layers", std::move(layers)}};
}

inline RegressorModel model_from_json(const nlohmann::json& j) {
  using json_util::field;
  const std::string what = "regressor file";
  if (field<std::string>(j, "format", what) != "autoeval-regressor")
    fail(ErrorKind::kFormat, "not a regressor file");
  if (field<int>(j, "version", what) != 1) fail(ErrorKind::kFormat, "unsupported regressor version");
  const auto dims = field<std::vector<int>>(j, "dims", what);
  try {
    RegressorModel::check_dims(dims);
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, e.what());
  }
  RegressorModel m = RegressorModel::zeros(dims);
  m.input_mean = json_util::vector_from_json(field<nlohmann::json>(j, "input_mean", what), "input_mean");
  m.input_scale = json_util::vector_from_json(field<nlohmann::json>(j, "input_scale", what), "input_scale");
  if (m.input_mean.size() != dims[0] || m.input_scale.size() != dims[0])
    fail(ErrorKind::kFormat, "normalization vectors do not match input width");
  const auto layers = field<nlohmann::json>(j, "layers", what);
  if (!layers.is_array() || layers.size() + 1 != dims.size())
    fail(ErrorKind::kFormat, "layer count does not match dims");
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto w = field<std::vector<double>>(layers[l], "weight", what);
    const auto b = field<std::vector<double>>(layers[l], "bias", what);
    auto& layer = m.layers[l];
    if (static_cast<Eigen::Index>(w.size()) != layer.weight.size() ||
        static_cast<Eigen::Index>(b.size()) != layer.bias.size())
      fail(ErrorKind::kFormat, "layer " + std::to_string(l) + " parameter count does not match dims");
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
        layer.weight(i, c) = w[static_cast<std::size_t>(i * layer.weight.cols() + c)];
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = b[static_cast<std::size_t>(i)];
  }
  return m;
}

inline void save_model(const RegressorModel& m, const std::filesystem::path& path) {
  atomic_write(path, to_json(m).dump());
}

inline RegressorModel load_model(const std::filesystem::path& path) {
  return model_from_json(json_util::parse(read_file(path), path.string()));
}

}  // namespace autoeval
