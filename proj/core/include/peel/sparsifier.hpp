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

#ifndef PEEL_SPARSIFIER_H_
#define PEEL_SPARSIFIER_H_

#include <optional>

#include <Eigen/Dense>

#include "peel/mechanism.hpp"
#include "peel/rng.hpp"

namespace peel {

// The canonical 1-sparse client representation: one active coordinate with
// a sign and a positive magnitude.
struct SparseCode {
  int dim = 0;
  int index = 0;
  int sign = +1;  // +1 or -1
  double magnitude = 0.0;

  // Dense vector with sign * magnitude at `index`, zero elsewhere.
  Eigen::VectorXd Dense() const;
};

enum class AllocationMode { kUniformOverSupport, kOptimal };

struct AllocationPolicy {
  // Per-dimension weights w; empty means all-ones.
  Eigen::VectorXd weights;
  AllocationMode mode = AllocationMode::kOptimal;
};

// Inclusion probabilities p_j = |w_j t_j| / sum_l |w_l t_l|. Throws
// DegenerateInputError when every product is zero.
Eigen::VectorXd HtAllocation(const Eigen::VectorXd& t,
                             const Eigen::VectorXd& weights);

// Inclusion probabilities under a policy: HtAllocation for the optimal
// mode, equal mass over the weighted support otherwise.
Eigen::VectorXd AllocationProbabilities(const Eigen::VectorXd& t,
                                        const AllocationPolicy& policy);

// Maps a report to the vector the sparsifier consumes: the report's own
// dense rendering for natively 1-sparse mechanisms (the one-hot of the
// category for kRR, the signed-constant vector for Harmony), and the
// unbiased transform t(z) for dense mechanisms.
Eigen::VectorXd SparsifierInput(const MechanismSpec& spec,
                                const PerturbedReport& z);

// The sparse mapping S. For 1-sparse mechanisms this is the identity on the
// single active coordinate; for dense mechanisms it draws one index J from
// the allocation and reweights by 1/p_J so that the conditional expectation
// of the dense rendering equals t. Returns nullopt for an all-zero t on the
// sampling path (the designated null report, excluded from encoding).
std::optional<SparseCode> Sparsify(const Eigen::VectorXd& t,
                                   const MechanismSpec& spec,
                                   const AllocationPolicy& policy, Rng& rng);

}  // namespace peel

#endif  // PEEL_SPARSIFIER_H_
