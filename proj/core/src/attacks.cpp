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

#include "peel/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "peel/errors.hpp"

namespace peel {

std::string AttackKindName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kOutputPoison:
      return "output";
    case AttackKind::kRulePoisonBudget:
      return "rule";
    case AttackKind::kProjectionPoison:
      return "projection";
  }
  return "unknown";
}

AttackKind AttackKindFromName(const std::string& name) {
  if (name == "none") return AttackKind::kNone;
  if (name == "output") return AttackKind::kOutputPoison;
  if (name == "rule") return AttackKind::kRulePoisonBudget;
  if (name == "projection") return AttackKind::kProjectionPoison;
  throw ConfigError("unknown attack kind: " + name);
}

std::vector<int64_t> CompromisedSet(const AttackConfig& config, int64_t n) {
  if (config.ratio < 0.0 || config.ratio > 1.0) {
    throw ConfigError("CompromisedSet: ratio must lie in [0, 1]");
  }
  if (config.target_set.has_value()) {
    return {config.target_set->begin(), config.target_set->end()};
  }
  const auto count = static_cast<int64_t>(std::llround(config.ratio * n));
  if (count <= 0) return {};

  // Rank clients by a keyed hash; the `count` lowest are compromised. Ties
  // (astronomically unlikely) break by client id.
  std::vector<std::pair<uint64_t, int64_t>> ranked;
  ranked.reserve(n);
  for (int64_t id = 0; id < n; ++id) {
    ranked.emplace_back(MixSeed(config.seed, static_cast<uint64_t>(id)), id);
  }
  std::nth_element(ranked.begin(), ranked.begin() + (count - 1), ranked.end());
  std::vector<int64_t> out;
  out.reserve(count);
  for (int64_t i = 0; i < count; ++i) out.push_back(ranked[i].second);
  std::sort(out.begin(), out.end());
  return out;
}

EncodedVector OutputPoison(const EncodedVector& encoded,
                           const MechanismSpec& spec, double strength,
                           Rng& rng, bool tamper_sidecar) {
  if (!(strength > 0.0)) {
    throw DomainError("OutputPoison: strength must be positive");
  }
  // The post-processing kernel exp(-eps ||Delta||_1 / f) with sensitivity
  // f = 2 factorizes into per-coordinate Laplace draws of scale
  // f * strength / eps.
  const double scale = 2.0 * strength / spec.epsilon;
  EncodedVector out = encoded;
  for (int j = 0; j < out.y.size(); ++j) out.y[j] += rng.NextLaplace(scale);
  if (tamper_sidecar) out.magnitude_sidecar *= 1.0 + strength;
  return out;
}

Eigen::VectorXd PoisonNormalizedReport(const Eigen::VectorXd& s_tilde,
                                       double strength, Rng& rng) {
  if (!(strength > 0.0)) {
    throw DomainError("PoisonNormalizedReport: strength must be positive");
  }
  const int k = static_cast<int>(s_tilde.size());
  int dominant = 0;
  for (int j = 1; j < k; ++j) {
    if (std::abs(s_tilde[j]) > std::abs(s_tilde[dominant])) dominant = j;
  }
  int extra = static_cast<int>(rng.NextInt(k - 1));
  if (extra >= dominant) ++extra;
  Eigen::VectorXd out = s_tilde;
  out[extra] += (rng.NextBernoulli(0.5) ? 1.0 : -1.0) * strength *
                std::sqrt(static_cast<double>(k - 1));
  return out;
}

std::vector<double> RulePoisonBudgets(int64_t n, double eps_total, double lo,
                                      double hi,
                                      const std::vector<int64_t>& compromised,
                                      Rng& rng) {
  if (n < 2) throw ConfigError("RulePoisonBudgets: need n >= 2");
  if (!(eps_total > 0.0)) {
    throw ConfigError("RulePoisonBudgets: eps_total must be positive");
  }
  if (!(lo > 0.0 && lo < 1.0 && hi > 1.0)) {
    throw ConfigError("RulePoisonBudgets: bounds must satisfy 0 < lo < 1 < hi");
  }
  const double mean_budget = eps_total / static_cast<double>(n);
  std::vector<double> budgets(n, mean_budget);

  std::vector<bool> is_compromised(n, false);
  for (int64_t id : compromised) {
    if (id < 0 || id >= n) {
      throw ConfigError("RulePoisonBudgets: compromised id out of range");
    }
    is_compromised[id] = true;
  }

  double compromised_sum = 0.0;
  double comp = 0.0;  // Kahan compensation
  int64_t n_comp = 0;
  for (int64_t id = 0; id < n; ++id) {
    if (!is_compromised[id]) continue;
    budgets[id] = rng.NextUniform(lo * mean_budget, hi * mean_budget);
    const double y = budgets[id] - comp;
    const double s = compromised_sum + y;
    comp = (s - compromised_sum) - y;
    compromised_sum = s;
    ++n_comp;
  }
  if (n_comp == 0) return budgets;
  if (n_comp == n) {
    throw DomainError(
        "RulePoisonBudgets: every client compromised, no budget left to "
        "absorb the correction");
  }

  const double correction =
      (static_cast<double>(n_comp) * mean_budget - compromised_sum) /
      static_cast<double>(n - n_comp);
  const double benign_budget = mean_budget + correction;
  if (!(benign_budget > 0.0)) {
    throw DomainError(
        "RulePoisonBudgets: infeasible correction, benign budgets would be " +
        std::to_string(benign_budget) + " <= 0");
  }
  for (int64_t id = 0; id < n; ++id) {
    if (!is_compromised[id]) budgets[id] = benign_budget;
  }
  return budgets;
}

Eigen::MatrixXd ProjectionPoison(const StructuralCodec& codec, double strength,
                                 Rng& rng) {
  if (strength < 0.0) {
    throw DomainError("ProjectionPoison: strength must be nonnegative");
  }
  if (strength == 0.0) return codec.phi;  // no-op substitution
  Eigen::MatrixXd poisoned = codec.phi;
  for (int r = 0; r < poisoned.rows(); ++r) {
    for (int c = 0; c < poisoned.cols(); ++c) {
      poisoned(r, c) += strength * rng.NextGaussian();
    }
  }
  return poisoned;
}

}  // namespace peel
