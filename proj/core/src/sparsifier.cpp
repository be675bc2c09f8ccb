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

#include "peel/sparsifier.hpp"

#include <cmath>

#include "peel/errors.hpp"

namespace peel {

Eigen::VectorXd SparseCode::Dense() const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v[index] = sign * magnitude;
  return v;
}

Eigen::VectorXd HtAllocation(const Eigen::VectorXd& t,
                             const Eigen::VectorXd& weights) {
  if (weights.size() != t.size()) {
    throw TypeError("HtAllocation: weights/t dimension mismatch");
  }
  Eigen::VectorXd products = (weights.array() * t.array()).abs();
  const double total = products.sum();
  if (!(total > 0.0)) {
    throw DegenerateInputError("HtAllocation: all weighted entries are zero");
  }
  return products / total;
}

Eigen::VectorXd AllocationProbabilities(const Eigen::VectorXd& t,
                                        const AllocationPolicy& policy) {
  const int k = static_cast<int>(t.size());
  const Eigen::VectorXd weights = policy.weights.size() == 0
                                      ? Eigen::VectorXd::Ones(k)
                                      : policy.weights;
  if (policy.mode == AllocationMode::kOptimal) {
    return HtAllocation(t, weights);
  }
  Eigen::VectorXd p = Eigen::VectorXd::Zero(k);
  int support = 0;
  for (int j = 0; j < k; ++j) {
    if (weights[j] * t[j] != 0.0) ++support;
  }
  if (support == 0) {
    throw DegenerateInputError(
        "AllocationProbabilities: empty weighted support");
  }
  for (int j = 0; j < k; ++j) {
    if (weights[j] * t[j] != 0.0) p[j] = 1.0 / support;
  }
  return p;
}

Eigen::VectorXd SparsifierInput(const MechanismSpec& spec,
                                const PerturbedReport& z) {
  if (spec.kind == MechanismKind::kKrr) {
    const int* cat = std::get_if<int>(&z.payload);
    if (cat == nullptr || *cat < 0 || *cat >= spec.dim) {
      throw TypeError("SparsifierInput: malformed kRR report");
    }
    Eigen::VectorXd onehot = Eigen::VectorXd::Zero(spec.dim);
    onehot[*cat] = 1.0;
    return onehot;
  }
  if (spec.kind == MechanismKind::kHarmony) {
    const auto* vec = std::get_if<Eigen::VectorXd>(&z.payload);
    if (vec == nullptr || vec->size() != spec.dim) {
      throw TypeError("SparsifierInput: malformed Harmony report");
    }
    return *vec;
  }
  return UnbiasedTransform(spec, z);
}

std::optional<SparseCode> Sparsify(const Eigen::VectorXd& t,
                                   const MechanismSpec& spec,
                                   const AllocationPolicy& policy, Rng& rng) {
  const int k = static_cast<int>(t.size());
  if (k != spec.dim) {
    throw TypeError("Sparsify: vector/mechanism dimension mismatch");
  }

  if (spec.is_one_sparse) {
    int active = -1;
    for (int j = 0; j < k; ++j) {
      if (t[j] != 0.0) {
        if (active >= 0) {
          throw TypeError(
              "Sparsify: identity path requires a 1-sparse input, found "
              "multiple active coordinates");
        }
        active = j;
      }
    }
    if (active < 0) {
      throw TypeError("Sparsify: identity path received an all-zero vector");
    }
    SparseCode code;
    code.dim = k;
    code.index = active;
    code.sign = t[active] > 0.0 ? +1 : -1;
    code.magnitude = std::abs(t[active]);
    return code;
  }

  if ((t.array() == 0.0).all()) return std::nullopt;  // null report

  const Eigen::VectorXd p = AllocationProbabilities(t, policy);

  // Draw J from p by inverse CDF over a single uniform.
  const double u = rng.NextUnit();
  double cum = 0.0;
  int drawn = -1;
  for (int j = 0; j < k; ++j) {
    cum += p[j];
    if (u < cum) {
      drawn = j;
      break;
    }
  }
  if (drawn < 0) {
    // Guard against cumulative rounding on the last positive entry.
    for (int j = k - 1; j >= 0; --j) {
      if (p[j] > 0.0) {
        drawn = j;
        break;
      }
    }
  }

  SparseCode code;
  code.dim = k;
  code.index = drawn;
  code.sign = t[drawn] > 0.0 ? +1 : -1;
  code.magnitude = std::abs(t[drawn]) / p[drawn];
  return code;
}

}  // namespace peel
