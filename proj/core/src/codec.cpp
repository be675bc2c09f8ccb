// Copyright 2026 The PEEL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "peel/codec.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "peel/errors.hpp"

namespace peel {
namespace {

constexpr double kConditionRejection = 1e8;
constexpr int kMaxResamples = 8;

}  // namespace

Eigen::VectorXd NormalizedCode::Dense() const {
  const double major = sign * std::sqrt(dim - 1.0);
  const double minor = -sign / std::sqrt(dim - 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(dim, minor);
  v[index] = major;
  return v;
}

Eigen::MatrixXd HelmertBasis(int k) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, k - 1);
  for (int col = 0; col < k - 1; ++col) {
    const double norm = std::sqrt((col + 1.0) * (col + 2.0));
    for (int row = 0; row <= col; ++row) w(row, col) = 1.0 / norm;
    w(col + 1, col) = -(col + 1.0) / norm;
  }
  return w;
}

std::vector<NormalizedCode> AdmissiblePatterns(int k) {
  if (k < 3) throw DomainError("AdmissiblePatterns: k must be >= 3");
  std::vector<NormalizedCode> patterns;
  patterns.reserve(2 * k);
  for (int index = 0; index < k; ++index) {
    for (int sign : {+1, -1}) {
      patterns.push_back(NormalizedCode{k, index, sign});
    }
  }
  return patterns;
}

StructuralCodec BuildCodec(int k, uint64_t seed) {
  if (k < 3) throw DomainError("BuildCodec: k must be >= 3");

  StructuralCodec codec;
  codec.dim = k;
  codec.seed = seed;
  codec.w = HelmertBasis(k);
  codec.patterns = AdmissiblePatterns(k);

  for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
    Rng rng(seed + static_cast<uint64_t>(attempt));
    Eigen::MatrixXd phi(k - 1, k);
    for (int r = 0; r < k - 1; ++r) {
      for (int c = 0; c < k; ++c) phi(r, c) = rng.NextGaussian();
    }
    Eigen::MatrixXd theta = phi * codec.w;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(theta);
    const double smin = svd.singularValues().tail(1)(0);
    const double smax = svd.singularValues()(0);
    const double cond = smin > 0.0 ? smax / smin
                                   : std::numeric_limits<double>::infinity();
    if (cond < kConditionRejection) {
      codec.phi = std::move(phi);
      codec.theta = std::move(theta);
      codec.theta_lu.compute(codec.theta);
      codec.theta_inv = codec.theta_lu.inverse();
      // Newton-Schulz refinement drives || Theta X - I || toward roundoff
      // so the exposed gamma matrix is as close to W Theta^-1 as doubles
      // allow.
      const Eigen::MatrixXd identity =
          Eigen::MatrixXd::Identity(k - 1, k - 1);
      for (int it = 0; it < 3; ++it) {
        const Eigen::MatrixXd residual =
            identity - codec.theta * codec.theta_inv;
        if (residual.cwiseAbs().maxCoeff() < 1e-14) break;
        codec.theta_inv += codec.theta_inv * residual;
      }
      codec.gamma = codec.w * codec.theta_inv;
      codec.cond_theta = cond;
      codec.resample_count = attempt;
      return codec;
    }
  }
  throw ConstructionError(
      "BuildCodec: projection draw rejected " +
      std::to_string(kMaxResamples + 1) +
      " times by the condition-number bound; give a different seed");
}

NormalizedCode Normalize(const SparseCode& s) {
  if (s.dim < 3) throw DomainError("Normalize: k must be >= 3");
  if (!(s.magnitude > 0.0)) {
    throw DomainError("Normalize: magnitude must be positive");
  }
  // Z-scoring a 1-sparse vector with population std (divisor k) lands on
  // sign*sqrt(k-1) at the index and -sign/sqrt(k-1) elsewhere, independent
  // of the magnitude.
  return NormalizedCode{s.dim, s.index, s.sign};
}

Eigen::VectorXd ProjectVector(const Eigen::MatrixXd& m,
                              const Eigen::VectorXd& v) {
  if (m.cols() != v.size()) {
    throw TypeError("ProjectVector: dimension mismatch");
  }
  Eigen::VectorXd out(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    long double acc = 0.0L;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      acc += static_cast<long double>(m(r, c)) * v[c];
    }
    out[r] = static_cast<double>(acc);
  }
  return out;
}

EncodedVector Encode(const StructuralCodec& codec, const SparseCode& s) {
  if (s.dim != codec.dim) {
    throw TypeError("Encode: code dimension " + std::to_string(s.dim) +
                    " does not match codec dimension " +
                    std::to_string(codec.dim));
  }
  EncodedVector out;
  out.y = ProjectVector(codec.phi, Normalize(s).Dense());
  out.magnitude_sidecar = s.magnitude;
  return out;
}

Eigen::VectorXd Reconstruct(const StructuralCodec& codec,
                            const Eigen::VectorXd& y) {
  if (y.size() != codec.dim - 1) {
    throw TypeError("Reconstruct: encoded vector has length " +
                    std::to_string(y.size()) + ", expected " +
                    std::to_string(codec.dim - 1));
  }
  // shat = Gamma y = W Theta^-1 y, evaluated as an LU solve with one
  // extended-precision refinement step.
  Eigen::VectorXd alpha = codec.theta_lu.solve(y);
  Eigen::VectorXd residual(y.size());
  for (Eigen::Index r = 0; r < y.size(); ++r) {
    long double acc = static_cast<long double>(y[r]);
    for (Eigen::Index c = 0; c < y.size(); ++c) {
      acc -= static_cast<long double>(codec.theta(r, c)) * alpha[c];
    }
    residual[r] = static_cast<double>(acc);
  }
  alpha += codec.theta_lu.solve(residual);
  return ProjectVector(codec.w, alpha);
}

Eigen::VectorXd Reconstruct(const StructuralCodec& codec,
                            const EncodedVector& encoded) {
  return Reconstruct(codec, encoded.y);
}

SparseCode Restore(const Eigen::VectorXd& shat, double magnitude_sidecar) {
  const int k = static_cast<int>(shat.size());
  int best = -1;
  double best_abs = 0.0;
  for (int j = 0; j < k; ++j) {
    const double a = std::abs(shat[j]);
    if (a > best_abs) {  // strict: ties keep the lowest index
      best_abs = a;
      best = j;
    }
  }
  if (best < 0) {
    throw RestorationError("Restore: all-zero reconstruction");
  }
  SparseCode code;
  code.dim = k;
  code.index = best;
  code.sign = shat[best] > 0.0 ? +1 : -1;
  code.magnitude = magnitude_sidecar;
  return code;
}

Quantizer Quantizer::ForDim(int k) {
  Quantizer q;
  q.bits = static_cast<int>(std::ceil(std::log2(k - 1.0)));
  if (q.bits < 1) q.bits = 1;
  const double range = 3.0 * std::sqrt(static_cast<double>(k));
  q.lo = -range;
  q.step = 2.0 * range / static_cast<double>(1LL << q.bits);
  return q;
}

double Quantizer::Apply(double value) const {
  const auto levels = static_cast<int64_t>(1) << bits;
  auto cell = static_cast<int64_t>(std::floor((value - lo) / step));
  if (cell < 0) cell = 0;
  if (cell >= levels) cell = levels - 1;
  return lo + (static_cast<double>(cell) + 0.5) * step;
}

Eigen::VectorXd Quantizer::Apply(const Eigen::VectorXd& y) const {
  Eigen::VectorXd out(y.size());
  for (int j = 0; j < y.size(); ++j) out[j] = Apply(y[j]);
  return out;
}

}  // namespace peel
