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

#ifndef PEEL_ESTIMATORS_H_
#define PEEL_ESTIMATORS_H_

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "peel/codec.hpp"
#include "peel/mechanism.hpp"
#include "peel/rng.hpp"
#include "peel/sparsifier.hpp"

namespace peel {

enum class QueryKind { kFrequency, kMean };

std::string QueryKindName(QueryKind kind);
QueryKind QueryKindFromName(const std::string& name);

struct QuerySpec {
  QueryKind kind = QueryKind::kFrequency;
  // Per-dimension aggregation weights; empty means all-ones.
  Eigen::VectorXd weights;
};

struct EstimateReport {
  // Post-processed estimate: frequency estimates are clipped to [0,1] and
  // renormalized to sum 1; mean estimates are reported as-is.
  Eigen::VectorXd estimate;
  // The pre-clip aggregate; unbiasedness statements are about this vector.
  Eigen::VectorXd raw_estimate;
  int64_t n = 0;
  double empirical_mse = std::numeric_limits<double>::quiet_NaN();
  double variance_baseline = std::numeric_limits<double>::quiet_NaN();
  double delta_n = std::numeric_limits<double>::quiet_NaN();
};

// Q applied to the per-report unbiased transforms t(z_i).
EstimateReport BaselineEstimate(const std::vector<PerturbedReport>& reports,
                                const MechanismSpec& spec,
                                const QuerySpec& query);

// Maps one restored sparse code back to the same t-space the baseline
// aggregates in: kRR re-applies the categorical debias to the recovered
// category; every other mechanism contributes its dense rendering directly.
Eigen::VectorXd RestoredToTransform(const MechanismSpec& spec,
                                    const SparseCode& code);

// Q applied to restored codes; aggregation is identical to the baseline.
EstimateReport PeelEstimate(const std::vector<SparseCode>& restored,
                            const MechanismSpec& spec, const QuerySpec& query);

// Empirical MSE/variance decomposition across repeated runs on a fixed
// population: both pipelines see the same perturbed reports per trial, so
// the difference isolates the sparsification sampling term.
struct VarianceDecomposition {
  double mse_baseline = 0.0;
  double mse_peel = 0.0;
  double delta_n_empirical = 0.0;  // mean of per-trial paired differences
  double delta_n_analytic = 0.0;   // (1/n) E[sum_j w_j^2 t_j^2 (1/p_j - 1)]
  double se_difference = 0.0;      // standard error of the paired difference
};

VarianceDecomposition RunVarianceDecomposition(
    const MechanismSpec& spec, const QuerySpec& query,
    const std::vector<RawRecord>& population, int trials,
    const AllocationPolicy& allocation, uint64_t seed);

// Ground-truth estimand of a raw population: the frequency vector of
// categories or the per-dimension mean.
Eigen::VectorXd PopulationTruth(const std::vector<RawRecord>& population,
                                const MechanismSpec& spec,
                                const QuerySpec& query);

}  // namespace peel

#endif  // PEEL_ESTIMATORS_H_
