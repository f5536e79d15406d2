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
#include <numeric>
#include <random>
#include <vector>

#include "autoeval/common.hpp"
#include "autoeval/error.hpp"
#include "autoeval/kmeans.hpp"

namespace autoeval {

// Greedy farthest-point order. The first pick is the row farthest from the
// column mean; each later pick maximizes its distance to the nearest
// already-picked row. Ties go to the lowest row index.
inline std::vector<Eigen::Index> fps_indices(const Matrix& x, int count) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (count < 1) fail(ErrorKind::kConfig, "sample count must be >= 1");
  if (n < count)
    fail(ErrorKind::kDimension, "N < S (N=" + std::to_string(n) + ", S=" + std::to_string(count) + ")");

  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) mean += x.row(i);
  mean /= static_cast<double>(n);

  std::vector<Eigen::Index> picked;
  picked.reserve(count);
  std::vector<double> nearest(n);
  Eigen::Index first = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = squared_distance(x.row(i).data(), mean.data(), d);
    if (v > best) {
      best = v;
      first = i;
    }
  }
  picked.push_back(first);
  for (Eigen::Index i = 0; i < n; ++i)
    nearest[i] = squared_distance(x.row(i).data(), x.row(first).data(), d);

  std::vector<char> taken(n, 0);
  taken[first] = 1;
  while (static_cast<int>(picked.size()) < count) {
    Eigen::Index next = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (taken[i]) continue;
      if (next < 0 || nearest[i] > nearest[next]) next = i;
    }
    picked.push_back(next);
    taken[next] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (taken[i]) continue;
      nearest[i] = std::min(nearest[i], squared_distance(x.row(i).data(), x.row(next).data(), d));
    }
  }
  return picked;
}

// Uniform draw without replacement (partial Fisher-Yates), in draw order.
inline std::vector<Eigen::Index> random_indices(Eigen::Index n, int count, std::uint64_t seed) {
  if (count < 1) fail(ErrorKind::kConfig, "sample count must be >= 1");
  if (n < count)
    fail(ErrorKind::kDimension, "N < S (N=" + std::to_string(n) + ", S=" + std::to_string(count) + ")");
  std::vector<Eigen::Index> idx(n);
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  return idx;
}

inline Matrix gather_rows(const Matrix& x, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

}  // namespace autoeval
