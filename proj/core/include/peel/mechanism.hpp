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

#ifndef PEEL_MECHANISM_H_
#define PEEL_MECHANISM_H_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "peel/rng.hpp"

namespace peel {

enum class MechanismKind { kKrr, kHarmony, kLaplace, kOue };

std::string MechanismKindName(MechanismKind kind);
MechanismKind MechanismKindFromName(const std::string& name);

// Declarative description of a client-side randomizer. Immutable and
// shareable; all derived fields are deterministic functions of
// (kind, epsilon, dim).
struct MechanismSpec {
  MechanismKind kind = MechanismKind::kKrr;
  double epsilon = 1.0;       // privacy budget, > 0
  int dim = 3;                // category count / attribute count, >= 3
  bool is_one_sparse = true;  // reports are natively 1-sparse
  bool sign_symmetric = false;
  double noise_scale = 0.0;   // benign per-coordinate noise scale
  double calib_delta = 0.0;   // structural-consistency bound
  double calib_eta = 0.01;    // tail mass outside the bound
};

// Validates (kind, epsilon, dim) and fills the derived fields.
MechanismSpec MakeMechanismSpec(MechanismKind kind, double epsilon, int dim);

// A raw client record: a category in [0, dim) for categorical mechanisms,
// or a real vector in [-1, 1]^dim for numeric ones.
using RawRecord = std::variant<int, Eigen::VectorXd>;

// The perturbed output z of one client. The payload is a bare category for
// kRR and a length-dim vector for every other mechanism (1-sparse with
// value +/-C for Harmony, dense for Laplace/OUE).
struct PerturbedReport {
  MechanismSpec spec;
  int64_t client_id = -1;
  std::variant<int, Eigen::VectorXd> payload;
};

// Closed-form probabilities, exposed for tests and estimators.
double KrrTruthProb(double epsilon, int k);  // e^eps / (e^eps + k - 1)
double KrrLieProb(double epsilon, int k);    // 1 / (e^eps + k - 1)
double OueKeepProb();                        // 1/2
double OueFlipProb(double epsilon);          // 1 / (e^eps + 1)

// The signed constant Harmony emits at the sampled dimension:
// k (e^eps + 1) / (e^eps - 1).
double HarmonyConstant(double epsilon, int k);

// Inverse of HarmonyConstant in epsilon for a fixed k. Returns +inf when the
// magnitude is at or below k (no finite budget reproduces it).
double HarmonyImpliedEpsilon(double magnitude, int k);

// Laplace per-coordinate noise scale under the uniform budget split:
// sensitivity 2 on [-1,1], budget eps/dim per attribute.
double LaplaceNoiseScale(double epsilon, int dim);

// Applies the randomizer to one record.
PerturbedReport Perturb(const MechanismSpec& spec, const RawRecord& x,
                        Rng& rng);

// Per-report transform t(z) whose expectation given x equals the estimand
// (the one-hot of x for kRR/OUE, x itself for Harmony/Laplace). The debias
// parameters come from `spec`, which is the aggregator's declared mechanism;
// the report may have been produced under a tampered budget.
Eigen::VectorXd UnbiasedTransform(const MechanismSpec& spec,
                                  const PerturbedReport& z);

// Admissible nonzero report magnitudes for the detector's magnitude check.
struct MagnitudeCodebook {
  bool unconstrained = false;
  std::vector<double> values;  // empty iff unconstrained
  double noise_scale = 0.0;    // benign scale parameter when unconstrained
};

MagnitudeCodebook GetMagnitudeCodebook(const MechanismSpec& spec);

}  // namespace peel

#endif  // PEEL_MECHANISM_H_
