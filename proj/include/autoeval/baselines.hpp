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

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "autoeval/common.hpp"
#include "autoeval/error.hpp"
#include "autoeval/featureset.hpp"

namespace autoeval {

namespace detail {
inline const Matrix& require_softmax(const FeatureSet& set, const char* who) {
  if (!set.softmax) fail(ErrorKind::kInput, std::string(who) + " needs softmax outputs");
  if (set.softmax->rows() < 1) fail(ErrorKind::kInput, std::string(who) + " needs at least one row");
  return *set.softmax;
}
}  // namespace detail

// Fraction of rows whose top softmax probability reaches tau1.
inline double prediction_score_estimate(const FeatureSet& set, double tau1) {
  const Matrix& p = detail::require_softmax(set, "prediction score");
  long hits = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if (p.row(i).maxCoeff() >= tau1) ++hits;
  return static_cast<double>(hits) / static_cast<double>(p.rows());
}

// Entropy normalized by log C, with 0 log 0 = 0.
inline double normalized_entropy(const Eigen::Ref<const Eigen::RowVectorXd>& p) {
  double h = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c)
    if (p[c] > 0.0) h -= p[c] * std::log(p[c]);
  return h / std::log(static_cast<double>(p.size()));
}

// Fraction of rows whose normalized entropy is below tau2.
inline double entropy_score_estimate(const FeatureSet& set, double tau2) {
  const Matrix& p = detail::require_softmax(set, "entropy score");
  if (p.cols() < 2) fail(ErrorKind::kInput, "entropy score needs C >= 2");
  long hits = 0;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if (normalized_entropy(p.row(i)) < tau2) ++hits;
  return static_cast<double>(hits) / static_cast<double>(p.rows());
}

inline double average_confidence(const FeatureSet& set) {
  const Matrix& p = detail::require_softmax(set, "average confidence");
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) s += p.row(i).maxCoeff();
  return s / static_cast<double>(p.rows());
}

inline constexpr double kCovarianceRidge = 1e-6;

struct GaussianSummary {
  Vector mean;
  Matrix covariance;  // sample covariance (N-1) plus ridge * I
};

inline GaussianSummary gaussian_summary(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) fail(ErrorKind::kInput, "gaussian summary needs N >= 2");
  GaussianSummary g;
  g.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - g.mean.transpose();
  g.covariance = (centered.transpose() * centered) / static_cast<double>(n - 1);
  g.covariance = (0.5 * (g.covariance + g.covariance.transpose())).eval();
  g.covariance.diagonal().array() += kCovarianceRidge;
  return g;
}

inline GaussianSummary gaussian_summary(const FeatureSet& set) { return gaussian_summary(set.features); }

/// Squared Frechet distance between two Gaussians,
///   |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}),
/// with the trace of the square root taken through the symmetric matrix
/// S_a^{1/2} S_b S_a^{1/2}, whose negative round-off eigenvalues are zeroed.
inline double frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  const Eigen::Index d = a.mean.size();
  if (b.mean.size() != d || a.covariance.rows() != d || b.covariance.rows() != d)
    fail(ErrorKind::kInput, "frechet distance: dimension mismatch");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_a(Eigen::MatrixXd(a.covariance));
  const Eigen::VectorXd root_vals = eig_a.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd root_a = eig_a.eigenvectors() * root_vals.asDiagonal() * eig_a.eigenvectors().transpose();
  Eigen::MatrixXd inner = root_a * Eigen::MatrixXd(b.covariance) * root_a;
  inner = (0.5 * (inner + inner.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig_inner(inner, Eigen::EigenvaluesOnly);
  const double tr_sqrt = eig_inner.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double mean_term = (a.mean - b.mean).squaredNorm();
  double fd = mean_term + a.covariance.trace() + b.covariance.trace() - 2.0 * tr_sqrt;
  if (!std::isfinite(fd)) fail(ErrorKind::kNumeric, "frechet distance is not finite");
  if (fd < 0.0) {
    const double scale = 1.0 + a.covariance.trace() + b.covariance.trace();
    if (fd < -1e-8 * scale) fail(ErrorKind::kNumeric, "frechet distance is negative beyond round-off");
    fd = 0.0;
  }
  return fd;
}

enum class BaselineKind { kFdOnly, kAcOnly, kFdSigmaTau };

// Low-dimensional set representations fed to the same regressor as ours.
inline Vector baseline_representation(const FeatureSet& set, const GaussianSummary& train,
                                      BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kAcOnly: {
      Vector v(1);
      v[0] = average_confidence(set);
      return v;
    }
    case BaselineKind::kFdOnly:
    case BaselineKind::kFdSigmaTau: {
      const GaussianSummary g = gaussian_summary(set);
      const double fd = frechet_distance(g, train);
      if (kind == BaselineKind::kFdOnly) {
        Vector v(1);
        v[0] = fd;
        return v;
      }
      const Eigen::Index d = g.mean.size();
      Vector v(1 + 2 * d);
      v[0] = fd;
      v.segment(1, d) = g.mean;
      v.segment(1 + d, d) = g.covariance.diagonal();
      return v;
    }
  }
  fail(ErrorKind::kInput, "unknown baseline kind");
}

}  // namespace autoeval
