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

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "autoeval/common.hpp"
#include "autoeval/error.hpp"

namespace autoeval {

struct KMeansOptions {
  int k = 1;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;
};

struct KMeansResult {
  Matrix centers;               // k x D
  std::vector<int> assignment;  // cluster of each point; centers are its means
  // Objective after every assignment step and every update step, in order.
  std::vector<double> objective_trace;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;  // assignment stable in the final iteration
};

inline double squared_distance(const double* a, const double* b, Eigen::Index d) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double t = a[j] - b[j];
    s += t * t;
  }
  return s;
}

namespace detail {

inline std::vector<Eigen::Index> kmeans_pp_init(const Matrix& x, int k, std::mt19937_64& rng) {
  const Eigen::Index n = x.rows(), d = x.cols();
  std::vector<Eigen::Index> chosen;
  chosen.reserve(k);
  std::vector<char> taken(n, 0);
  chosen.push_back(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  taken[chosen.back()] = 1;
  std::vector<double> d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = squared_distance(x.row(i).data(), x.row(chosen[0]).data(), d);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(chosen.size()) < k) {
    double total = 0.0;
    for (double v : d2) total += v;
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double r = unit(rng) * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > r) break;
      }
    }
    if (pick < 0) {
      // All remaining mass is zero: duplicates only. Take the first free row.
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!taken[i]) {
          pick = i;
          break;
        }
      }
    }
    chosen.push_back(pick);
    taken[pick] = 1;
    for (Eigen::Index i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(x.row(i).data(), x.row(pick).data(), d));
  }
  return chosen;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Stops when the assignment is
/// stable, when the relative objective decrease drops below `tol`, or after
/// `max_iters` iterations. Empty clusters are reseeded at the point farthest
/// from its nearest center.
inline KMeansResult kmeans(const Matrix& x, const KMeansOptions& opts) {
  const Eigen::Index n = x.rows(), d = x.cols();
  const int k = opts.k;
  if (k < 1) fail(ErrorKind::kConfig, "k-means needs k >= 1");
  if (n < k) fail(ErrorKind::kDimension, "k-means needs N >= K (N=" + std::to_string(n) +
                                             ", K=" + std::to_string(k) + ")");
  std::mt19937_64 rng(opts.seed);
  KMeansResult res;
  res.centers.resize(k, d);
  {
    const auto init = detail::kmeans_pp_init(x, k, rng);
    for (int c = 0; c < k; ++c) res.centers.row(c) = x.row(init[c]);
  }

  std::vector<int> assign(n, -1);
  std::vector<double> d2(n);
  std::vector<long> counts(k);
  double prev_update_obj = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < std::max(1, opts.max_iters); ++iter) {
    // Assignment step; ties go to the lowest center index.
    bool changed = false;
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double v = squared_distance(x.row(i).data(), res.centers.row(c).data(), d);
        if (v < best_d) {
          best_d = v;
          best = c;
        }
      }
      if (assign[i] != best) changed = true;
      assign[i] = best;
      d2[i] = best_d;
      obj += best_d;
    }
    res.objective_trace.push_back(obj);
    res.iterations = iter + 1;
    if (!changed) {
      res.converged = true;
      break;
    }

    // Update step.
    Matrix sums = Matrix::Zero(k, d);
    std::fill(counts.begin(), counts.end(), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += x.row(i);
      ++counts[assign[i]];
    }
    bool reseeded = false;
    std::vector<char> used(n, 0);
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        res.centers.row(c) = sums.row(c) / static_cast<double>(counts[c]);
        continue;
      }
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!used[i] && (far < 0 || d2[i] > d2[far])) far = i;
      used[far] = 1;
      res.centers.row(c) = x.row(far);
      reseeded = true;
    }
    double upd = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      upd += squared_distance(x.row(i).data(), res.centers.row(assign[i]).data(), d);
    res.objective_trace.push_back(upd);

    if (!reseeded && std::isfinite(prev_update_obj)) {
      const double scale = std::max(prev_update_obj, std::numeric_limits<double>::min());
      if (prev_update_obj == 0.0 || (prev_update_obj - upd) / scale < opts.tol) break;
    }
    prev_update_obj = upd;
  }
  res.assignment = std::move(assign);
  res.objective = res.objective_trace.back();
  return res;
}

}  // namespace autoeval
