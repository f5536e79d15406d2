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

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "autoeval/common.hpp"
#include "autoeval/error.hpp"

namespace autoeval {

/// Feature collection for one dataset: the penultimate-layer activations of
/// the classifier on every sample, plus its softmax outputs and the labels
/// when those are known.
struct FeatureSet {
  Matrix features;                          // N x D
  std::optional<Matrix> softmax;            // N x C
  std::optional<std::vector<int>> labels;   // N, values in [0, C)
  int num_classes = 0;                      // C; 0 when neither softmax nor labels
  std::string source_id;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dims() const { return features.cols(); }
};

// Content equality; source_id is metadata and is not compared.
inline bool same_content(const FeatureSet& a, const FeatureSet& b) {
  if (a.num_classes != b.num_classes) return false;
  if (a.features.rows() != b.features.rows() || a.features.cols() != b.features.cols()) return false;
  if (std::memcmp(a.features.data(), b.features.data(), sizeof(double) * a.features.size()) != 0)
    return false;
  if (a.softmax.has_value() != b.softmax.has_value()) return false;
  if (a.softmax) {
    if (a.softmax->rows() != b.softmax->rows() || a.softmax->cols() != b.softmax->cols()) return false;
    if (std::memcmp(a.softmax->data(), b.softmax->data(), sizeof(double) * a.softmax->size()) != 0)
      return false;
  }
  return a.labels == b.labels;
}

struct Violation {
  std::string field;
  long row = -1;  // -1 when the rule is not row-specific
  std::string rule;

  std::string describe() const {
    std::ostringstream os;
    os << field;
    if (row >= 0) os << "[row " << row << "]";
    os << ": " << rule;
    return os.str();
  }
};

inline constexpr double kSoftmaxSumTolerance = 1e-5;

inline std::vector<Violation> validate(const FeatureSet& set) {
  std::vector<Violation> out;
  const auto n = set.features.rows();
  const auto d = set.features.cols();
  if (n < 1) out.push_back({"features", -1, "N must be >= 1"});
  if (d < 1) out.push_back({"features", -1, "D must be >= 1"});
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!set.features.row(i).allFinite())
      out.push_back({"features", static_cast<long>(i), "entries must be finite"});
  }
  if (set.softmax) {
    const Matrix& p = *set.softmax;
    if (p.rows() != n) out.push_back({"softmax", -1, "row count must equal N"});
    if (p.cols() != set.num_classes)
      out.push_back({"softmax", -1, "column count must equal C"});
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const auto row = p.row(i);
      if (!row.allFinite() || row.minCoeff() < 0.0 || row.maxCoeff() > 1.0) {
        out.push_back({"softmax", static_cast<long>(i), "entries must lie in [0,1]"});
      } else if (std::abs(row.sum() - 1.0) > kSoftmaxSumTolerance) {
        out.push_back({"softmax", static_cast<long>(i), "row must sum to 1 within 1e-5"});
      }
    }
  }
  if (set.labels) {
    const auto& y = *set.labels;
    if (static_cast<Eigen::Index>(y.size()) != n)
      out.push_back({"labels", -1, "length must equal N"});
    if (set.num_classes < 1) out.push_back({"labels", -1, "C must be >= 1 when labels are present"});
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] < 0 || y[i] >= set.num_classes)
        out.push_back({"labels", static_cast<long>(i), "label must lie in [0, C)"});
    }
  }
  return out;
}

namespace detail {

inline constexpr char kFsetMagic[4] = {'F', 'S', 'E', 'T'};
inline constexpr std::uint16_t kFsetVersion = 1;
inline constexpr std::uint16_t kFlagSoftmax = 1u << 0;
inline constexpr std::uint16_t kFlagLabels = 1u << 1;
inline constexpr std::size_t kFsetHeaderBytes = 20;

template <class U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <class U>
U get_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return static_cast<U>(v);
}

inline void put_f32(std::string& out, double value) {
  put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(value)));
}

inline double get_f32(const unsigned char* p) {
  return static_cast<double>(std::bit_cast<float>(get_le<std::uint32_t>(p)));
}

}  // namespace detail

/// Serializes to the FSET layout: 20-byte little-endian header
/// (magic, u16 version, u16 flags, u32 N, u32 D, u32 C) followed by
/// float32 features, float32 softmax, int32 labels.
inline std::string encode(const FeatureSet& set) {
  if (auto v = validate(set); !v.empty())
    fail(ErrorKind::kValidation, "cannot save invalid feature set: " + v.front().describe());
  using namespace detail;
  const auto n = static_cast<std::uint32_t>(set.features.rows());
  const auto d = static_cast<std::uint32_t>(set.features.cols());
  std::uint16_t flags = 0;
  if (set.softmax) flags |= kFlagSoftmax;
  if (set.labels) flags |= kFlagLabels;

  std::string out;
  std::size_t payload = std::size_t{n} * d * 4;
  if (set.softmax) payload += std::size_t{n} * set.num_classes * 4;
  if (set.labels) payload += std::size_t{n} * 4;
  out.reserve(kFsetHeaderBytes + payload);
  out.append(kFsetMagic, 4);
  put_le(out, kFsetVersion);
  put_le(out, flags);
  put_le(out, n);
  put_le(out, d);
  put_le(out, static_cast<std::uint32_t>(set.num_classes));
  for (Eigen::Index i = 0; i < set.features.size(); ++i) put_f32(out, set.features.data()[i]);
  if (set.softmax)
    for (Eigen::Index i = 0; i < set.softmax->size(); ++i) put_f32(out, set.softmax->data()[i]);
  if (set.labels)
    for (int y : *set.labels) put_le(out, static_cast<std::uint32_t>(static_cast<std::int32_t>(y)));
  return out;
}

/// Parses FSET bytes. Structural problems raise format errors; invariant
/// violations raise validation errors unless `check` is false.
inline FeatureSet decode(std::string_view bytes, bool check = true) {
  using namespace detail;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < kFsetHeaderBytes) fail(ErrorKind::kFormat, "file shorter than FSET header");
  if (std::memcmp(p, kFsetMagic, 4) != 0) fail(ErrorKind::kFormat, "bad magic, expected FSET");
  const auto version = get_le<std::uint16_t>(p + 4);
  if (version != kFsetVersion)
    fail(ErrorKind::kFormat, "unsupported FSET version " + std::to_string(version));
  const auto flags = get_le<std::uint16_t>(p + 6);
  if (flags & ~(kFlagSoftmax | kFlagLabels)) fail(ErrorKind::kFormat, "unknown flag bits set");
  const std::uint64_t n = get_le<std::uint32_t>(p + 8);
  const std::uint64_t d = get_le<std::uint32_t>(p + 12);
  const std::uint64_t c = get_le<std::uint32_t>(p + 16);
  const bool has_softmax = flags & kFlagSoftmax;
  const bool has_labels = flags & kFlagLabels;

  std::uint64_t expected = n * d * 4;
  if (has_softmax) expected += n * c * 4;
  if (has_labels) expected += n * 4;
  const std::uint64_t actual = bytes.size() - kFsetHeaderBytes;
  if (actual < expected) fail(ErrorKind::kFormat, "truncated payload");
  if (actual > expected) fail(ErrorKind::kFormat, "trailing bytes after payload");

  FeatureSet set;
  set.num_classes = static_cast<int>(c);
  const unsigned char* cur = p + kFsetHeaderBytes;
  set.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < set.features.size(); ++i, cur += 4) set.features.data()[i] = get_f32(cur);
  if (has_softmax) {
    Matrix sm(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < sm.size(); ++i, cur += 4) sm.data()[i] = get_f32(cur);
    set.softmax = std::move(sm);
  }
  if (has_labels) {
    std::vector<int> y(n);
    for (auto& v : y) {
      v = static_cast<std::int32_t>(get_le<std::uint32_t>(cur));
      cur += 4;
    }
    set.labels = std::move(y);
  }
  if (check) {
    if (auto v = validate(set); !v.empty())
      fail(ErrorKind::kValidation, v.front().describe());
  }
  return set;
}

inline void save(const FeatureSet& set, const std::filesystem::path& path) {
  atomic_write(path, encode(set));
}

inline FeatureSet load(const std::filesystem::path& path, bool check = true) {
  FeatureSet set = decode(read_file(path), check);
  set.source_id = path.stem().string();
  return set;
}

}  // namespace autoeval
