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

#ifndef PEEL_ATTACKS_H_
#define PEEL_ATTACKS_H_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "peel/codec.hpp"
#include "peel/mechanism.hpp"
#include "peel/rng.hpp"

namespace peel {

enum class AttackKind { kNone, kOutputPoison, kRulePoisonBudget, kProjectionPoison };

std::string AttackKindName(AttackKind kind);
AttackKind AttackKindFromName(const std::string& name);

// Where an output-poisoning adversary injects its perturbation: on the
// transmitted encoded vector, or on the normalized report before
// projection (which breaks subspace alignment instead of the pattern).
enum class PoisonSurface { kEncoded, kReport };

struct AttackConfig {
  AttackKind kind = AttackKind::kNone;
  double ratio = 0.0;       // fraction of clients compromised
  double strength = 0.0;    // perturbation scale / matrix entry scale
  uint64_t seed = 0;
  std::optional<std::set<int64_t>> target_set;
  // Rule poisoning: per-client budget multipliers in [lo, hi] around the
  // audited mean budget.
  double rule_lo = 0.25;
  double rule_hi = 4.0;
  bool tamper_sidecar = false;
  PoisonSurface surface = PoisonSurface::kEncoded;
};

// The compromised client ids: target_set when present, otherwise the
// round(ratio * n) clients whose MixSeed(seed, id) hashes rank lowest.
// Deterministic in (seed, ratio, n).
std::vector<int64_t> CompromisedSet(const AttackConfig& config, int64_t n);

// Adds per-coordinate Laplace(2 * strength / epsilon) noise to y; when
// tamper_sidecar is set the sidecar is rescaled by (1 + strength).
EncodedVector OutputPoison(const EncodedVector& encoded,
                           const MechanismSpec& spec, double strength,
                           Rng& rng, bool tamper_sidecar = false);

// Pre-encoding surface: activates one extra coordinate of the normalized
// vector, producing a report outside the admissible structural set.
Eigen::VectorXd PoisonNormalizedReport(const Eigen::VectorXd& s_tilde,
                                       double strength, Rng& rng);

// Per-client budgets totalling eps_total: compromised clients get uniform
// draws in [lo, hi] * (eps_total / n); the remaining budgets share one
// additive correction so the audited sum is exact. Throws DomainError if
// the correction would drive any budget to zero or below.
std::vector<double> RulePoisonBudgets(int64_t n, double eps_total, double lo,
                                      double hi,
                                      const std::vector<int64_t>& compromised,
                                      Rng& rng);

// Phi + Delta with iid N(0, strength^2) entries (Delta = 0 at strength 0).
// The aggregator keeps reconstructing with the Gamma of the unpoisoned
// codec.
Eigen::MatrixXd ProjectionPoison(const StructuralCodec& codec, double strength,
                                 Rng& rng);

}  // namespace peel

#endif  // PEEL_ATTACKS_H_
