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
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "autoeval/common.hpp"
#include "autoeval/error.hpp"
#include "autoeval/featureset.hpp"
#include "autoeval/hungarian.hpp"
#include "autoeval/json_util.hpp"
#include "autoeval/kmeans.hpp"
#include "autoeval/sampling.hpp"

namespace autoeval {

enum class Sampler { kFps, kRandom };

struct RepresentationOptions {
  int bins = 30;       // B
  int clusters = 0;    // K; 0 means "number of classes"
  int samples = 100;   // S
  bool include_global_mean = false;
  Sampler sampler = Sampler::kFps;
  std::uint64_t sampler_seed = 0;  // used by Sampler::kRandom only
  std::uint64_t kmeans_seed = 0;
  int kmeans_max_iters = 100;
  double kmeans_tol = 1e-6;

  void check() const {
    if (bins < 2) fail(ErrorKind::kConfig, "bins (B) must be >= 2");
    if (clusters < 0) fail(ErrorKind::kConfig, "clusters (K) must be >= 1, or 0 for the class count");
    if (samples < 1) fail(ErrorKind::kConfig, "samples (S) must be >= 1");
    if (kmeans_max_iters < 1) fail(ErrorKind::kConfig, "kmeans_max_iters must be >= 1");
    if (!(kmeans_tol >= 0.0)) fail(ErrorKind::kConfig, "kmeans_tol must be >= 0");
  }
};

inline nlohmann::json to_json(const RepresentationOptions& o) {
  return {{"bins", o.bins},
          {"clusters", o.clusters},
          {"samples", o.samples},
          {"include_global_mean", o.include_global_mean},
          {"sampler", o.sampler == Sampler::kFps ? "FPS" : "RANDOM"},
          {"sampler_seed", o.sampler_seed},
          {"kmeans_seed", o.kmeans_seed},
          {"kmeans_max_iters", o.kmeans_max_iters},
          {"kmeans_tol", o.kmeans_tol}};
}

// Overlays the keys present in `j` onto `o`. Unknown keys and wrong types
// are config errors.
inline void merge_json(RepresentationOptions& o, const nlohmann::json& j) {
  if (!j.is_object()) fail(ErrorKind::kConfig, "representation options must be a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "bins") o.bins = val.get<int>();
      else if (key == "clusters") o.clusters = val.get<int>();
      else if (key == "samples") o.samples = val.get<int>();
      else if (key == "include_global_mean") o.include_global_mean = val.get<bool>();
      else if (key == "sampler") {
        const auto s = val.get<std::string>();
        if (s == "FPS") o.sampler = Sampler::kFps;
        else if (s == "RANDOM") o.sampler = Sampler::kRandom;
        else fail(ErrorKind::kConfig, "sampler must be FPS or RANDOM");
      } else if (key == "sampler_seed") o.sampler_seed = val.get<std::uint64_t>();
      else if (key == "kmeans_seed") o.kmeans_seed = val.get<std::uint64_t>();
      else if (key == "kmeans_max_iters") o.kmeans_max_iters = val.get<int>();
      else if (key == "kmeans_tol") o.kmeans_tol = val.get<double>();
      else fail(ErrorKind::kConfig, "unknown representation option '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("representation options: ") + e.what());
  }
  o.check();
}

/// Source-derived coordinates shared by every set: per-dimension histogram
/// edges and per-class feature centroids.
struct ReferenceFrame {
  Matrix bin_edges;        // D x (B+1), strictly increasing per row
  Matrix class_centroids;  // K x D
  std::string built_from;

  int bins() const { return static_cast<int>(bin_edges.cols()) - 1; }
  int clusters() const { return static_cast<int>(class_centroids.rows()); }
  Eigen::Index dims() const { return bin_edges.rows(); }
};

inline constexpr double kEdgeMarginFraction = 0.05;

inline void check_frame(const ReferenceFrame& f) {
  if (f.bin_edges.cols() < 3) fail(ErrorKind::kValidation, "frame needs B >= 2 bins");
  if (f.class_centroids.rows() < 1) fail(ErrorKind::kValidation, "frame needs K >= 1 centroids");
  if (f.class_centroids.cols() != f.bin_edges.rows())
    fail(ErrorKind::kValidation, "frame centroids and edges disagree on D");
  for (Eigen::Index d = 0; d < f.bin_edges.rows(); ++d)
    for (Eigen::Index b = 1; b < f.bin_edges.cols(); ++b)
      if (!(f.bin_edges(d, b) > f.bin_edges(d, b - 1)))
        fail(ErrorKind::kValidation, "bin edges not strictly increasing in dimension " + std::to_string(d));
  const auto k = f.class_centroids.rows();
  const auto d = f.class_centroids.cols();
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = a + 1; b < k; ++b)
      if (squared_distance(f.class_centroids.row(a).data(), f.class_centroids.row(b).data(), d) <= 0.0)
        fail(ErrorKind::kValidation, "class centroids " + std::to_string(a) + " and " +
                                         std::to_string(b) + " coincide");
}

inline ReferenceFrame build_reference_frame(const FeatureSet& source, const RepresentationOptions& opts) {
  opts.check();
  if (!source.labels) fail(ErrorKind::kValidation, "reference frame needs a labelled source set");
  const Eigen::Index n = source.rows(), dims = source.dims();
  const int k = opts.clusters > 0 ? opts.clusters : source.num_classes;
  if (k < 1) fail(ErrorKind::kValidation, "reference frame: cannot infer K from source");
  if (k > n) fail(ErrorKind::kValidation, "reference frame: K > N");

  ReferenceFrame frame;
  frame.built_from = source.source_id;
  frame.bin_edges.resize(dims, opts.bins + 1);
  for (Eigen::Index d = 0; d < dims; ++d) {
    const double lo = source.features.col(d).minCoeff();
    const double hi = source.features.col(d).maxCoeff();
    const double range = hi - lo;
    const double margin = range > 0.0 ? kEdgeMarginFraction * range : kEdgeMarginFraction;
    const double a = lo - margin, b = hi + margin;
    const double width = (b - a) / opts.bins;
    for (int e = 0; e < opts.bins; ++e) frame.bin_edges(d, e) = a + e * width;
    frame.bin_edges(d, opts.bins) = b;
  }

  frame.class_centroids = Matrix::Zero(k, dims);
  std::vector<long> counts(k, 0);
  const auto& y = *source.labels;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] < 0 || y[i] >= k)
      fail(ErrorKind::kValidation, "reference frame: label " + std::to_string(y[i]) + " outside [0, K)");
    frame.class_centroids.row(y[i]) += source.features.row(i);
    ++counts[y[i]];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0)
      fail(ErrorKind::kValidation, "reference frame: class " + std::to_string(c) + " absent from labels");
    frame.class_centroids.row(c) /= static_cast<double>(counts[c]);
  }
  check_frame(frame);
  return frame;
}

// Bin index under the left-closed/right-open convention (last bin closed);
// out-of-range values clip into the edge bins.
inline int bin_of(const double* edges, int bins, double v) {
  if (v < edges[0]) return 0;
  if (v >= edges[bins]) return bins - 1;
  const double* it = std::upper_bound(edges, edges + bins + 1, v);
  return static_cast<int>(it - edges) - 1;
}

/// Per-dimension histograms of the marginal distributions, as fractions.
inline Matrix compute_shape(const FeatureSet& set, const ReferenceFrame& frame) {
  if (set.dims() != frame.dims())
    fail(ErrorKind::kDimension, "shape: set has D=" + std::to_string(set.dims()) + ", frame has D=" +
                                    std::to_string(frame.dims()));
  const int bins = frame.bins();
  const Eigen::Index n = set.rows();
  Matrix shape = Matrix::Zero(set.dims(), bins);
  std::vector<double> edges(bins + 1);
  std::vector<long> counts(bins);
  for (Eigen::Index d = 0; d < set.dims(); ++d) {
    for (int e = 0; e <= bins; ++e) edges[e] = frame.bin_edges(d, e);
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) ++counts[bin_of(edges.data(), bins, set.features(i, d))];
    for (int b = 0; b < bins; ++b) shape(d, b) = static_cast<double>(counts[b]) / static_cast<double>(n);
  }
  return shape;
}

/// k-means centers, reordered so that row k is the center matched to
/// reference class k under a minimum-total-distance assignment.
inline Matrix compute_clusters(const FeatureSet& set, const ReferenceFrame& frame,
                               const RepresentationOptions& opts) {
  if (set.dims() != frame.dims()) fail(ErrorKind::kDimension, "clusters: dimension mismatch with frame");
  const int k = frame.clusters();
  if (set.rows() < k)
    fail(ErrorKind::kDimension, "N < K (N=" + std::to_string(set.rows()) + ", K=" + std::to_string(k) + ")");
  const KMeansResult km =
      kmeans(set.features, {.k = k, .seed = opts.kmeans_seed, .max_iters = opts.kmeans_max_iters,
                            .tol = opts.kmeans_tol});
  Matrix cost(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      cost(a, b) = (km.centers.row(a) - frame.class_centroids.row(b)).norm();
  const auto col_of_row = hungarian(cost);
  Matrix ordered(k, set.dims());
  for (int a = 0; a < k; ++a) ordered.row(col_of_row[a]) = km.centers.row(a);
  return ordered;
}

inline Matrix fps_sample(const FeatureSet& set, int count) {
  return gather_rows(set.features, fps_indices(set.features, count));
}

inline Matrix random_sample(const FeatureSet& set, int count, std::uint64_t seed) {
  return gather_rows(set.features, random_indices(set.rows(), count, seed));
}

inline Vector global_mean(const Matrix& x) {
  Vector m = Vector::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) m += x.row(i).transpose();
  return m / static_cast<double>(x.rows());
}

// Row order sorted lexicographically by value. Representations computed on
// this order do not depend on how the input rows were arranged.
inline std::vector<Eigen::Index> canonical_order(const Matrix& x) {
  std::vector<Eigen::Index> idx(x.rows());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double* ra = x.row(a).data();
    const double* rb = x.row(b).data();
    return std::lexicographical_compare(ra, ra + x.cols(), rb, rb + x.cols());
  });
  return idx;
}

inline FeatureSet canonicalized(const FeatureSet& set) {
  const auto order = canonical_order(set.features);
  FeatureSet out;
  out.features = gather_rows(set.features, order);
  if (set.softmax) out.softmax = gather_rows(*set.softmax, order);
  if (set.labels) {
    std::vector<int> y(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) y[i] = (*set.labels)[order[i]];
    out.labels = std::move(y);
  }
  out.num_classes = set.num_classes;
  out.source_id = set.source_id;
  return out;
}

inline Vector flatten(std::initializer_list<const Matrix*> parts, const Vector* tail = nullptr) {
  Eigen::Index len = tail ? tail->size() : 0;
  for (const Matrix* p : parts) len += p->size();
  Vector flat(len);
  Eigen::Index at = 0;
  for (const Matrix* p : parts) {
    std::copy(p->data(), p->data() + p->size(), flat.data() + at);  // row-major storage
    at += p->size();
  }
  if (tail) flat.segment(at, tail->size()) = *tail;
  return flat;
}

struct DatasetRepresentation {
  std::string source_id;
  Matrix shape;     // D x B
  Matrix clusters;  // K x D
  Matrix samples;   // S x D, in selection order
  std::optional<Vector> global_mean;
  Vector flat;  // [shape, clusters, samples, global_mean?], each row-major
  RepresentationOptions options;
};

inline DatasetRepresentation assemble(const FeatureSet& set, const ReferenceFrame& frame,
                                      const RepresentationOptions& opts) {
  opts.check();
  if (opts.clusters > 0 && opts.clusters != frame.clusters())
    fail(ErrorKind::kConfig, "options K=" + std::to_string(opts.clusters) + " disagrees with frame K=" +
                                 std::to_string(frame.clusters()));
  if (set.dims() != frame.dims())
    fail(ErrorKind::kDimension, "set has D=" + std::to_string(set.dims()) + ", frame has D=" +
                                    std::to_string(frame.dims()));
  if (set.rows() < opts.samples)
    fail(ErrorKind::kDimension, "N < S (N=" + std::to_string(set.rows()) + ", S=" +
                                    std::to_string(opts.samples) + ")");
  FeatureSet canon;
  canon.features = gather_rows(set.features, canonical_order(set.features));

  DatasetRepresentation rep;
  rep.source_id = set.source_id;
  rep.options = opts;
  rep.shape = compute_shape(canon, frame);
  rep.clusters = compute_clusters(canon, frame, opts);
  rep.samples = opts.sampler == Sampler::kFps ? fps_sample(canon, opts.samples)
                                              : random_sample(canon, opts.samples, opts.sampler_seed);
  if (opts.include_global_mean) rep.global_mean = global_mean(canon.features);
  rep.flat = flatten({&rep.shape, &rep.clusters, &rep.samples},
                     rep.global_mean ? &*rep.global_mean : nullptr);
  return rep;
}

inline nlohmann::json to_json(const DatasetRepresentation& r) {
  using namespace json_util;
  nlohmann::json j = {{"source_id", r.source_id},
                      {"options", to_json(r.options)},
                      {"shape", matrix_to_json(r.shape)},
                      {"clusters", matrix_to_json(r.clusters)},
                      {"samples", matrix_to_json(r.samples)}};
  if (r.global_mean) j["global_mean"] = vector_to_json(*r.global_mean);
  j["flat"] = vector_to_json(r.flat);
  return j;
}

inline nlohmann::json to_json(const ReferenceFrame& f) {
  using namespace json_util;
  return {{"format", "autoeval-frame"},
          {"version", 1},
          {"built_from", f.built_from},
          {"bins", f.bins()},
          {"clusters", f.clusters()},
          {"bin_edges", matrix_to_json(f.bin_edges)},
          {"class_centroids", matrix_to_json(f.class_centroids)}};
}

inline ReferenceFrame frame_from_json(const nlohmann::json& j) {
  using namespace json_util;
  if (field<std::string>(j, "format", "frame") != "autoeval-frame" || field<int>(j, "version", "frame") != 1)
    fail(ErrorKind::kFormat, "not a version-1 reference frame");
  ReferenceFrame f;
  f.built_from = field<std::string>(j, "built_from", "frame");
  f.bin_edges = matrix_from_json(field<nlohmann::json>(j, "bin_edges", "frame"), "bin_edges");
  f.class_centroids = matrix_from_json(field<nlohmann::json>(j, "class_centroids", "frame"), "class_centroids");
  if (f.bins() != field<int>(j, "bins", "frame") || f.clusters() != field<int>(j, "clusters", "frame"))
    fail(ErrorKind::kFormat, "frame header disagrees with its matrices");
  check_frame(f);
  return f;
}

}  // namespace autoeval
