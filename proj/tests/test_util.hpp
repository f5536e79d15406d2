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
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "autoeval/common.hpp"
#include "autoeval/featureset.hpp"

namespace autoeval::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    std::string name = info ? std::string(info->test_suite_name()) + "_" + info->name() : "autoeval";
    for (char& c : name)
      if (c == '/') c = '_';
    path_ = std::filesystem::temp_directory_path() / ("autoeval_" + name);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline double f32(double v) { return static_cast<double>(static_cast<float>(v)); }

inline Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  return x;
}

// Random valid set whose values survive float32 storage unchanged.
inline FeatureSet random_set(Eigen::Index n, Eigen::Index d, int c, bool softmax, bool labels, std::mt19937_64& rng) {
  FeatureSet s;
  s.features = random_matrix(n, d, rng).unaryExpr([](double v) { return f32(v); });
  s.num_classes = (softmax || labels) ? c : 0;
  if (softmax) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix p(n, c);
    for (Eigen::Index i = 0; i < n; ++i) {
      double sum = 0.0;
      for (int k = 0; k < c; ++k) sum += (p(i, k) = u(rng));
      for (int k = 0; k < c; ++k) p(i, k) = f32(p(i, k) / sum);
    }
    s.softmax = p;
  }
  if (labels) {
    std::uniform_int_distribution<int> u(0, c - 1);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (auto& v : y) v = u(rng);
    s.labels = y;
  }
  return s;
}

template <class F>
ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an autoeval::Error";
  return ErrorKind::kConfig;
}

}  // namespace autoeval::testing
