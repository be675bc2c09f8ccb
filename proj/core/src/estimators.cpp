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

#include "peel/estimators.hpp"

#include <cmath>

#include "peel/errors.hpp"

namespace peel {
namespace {

Eigen::VectorXd EffectiveWeights(const QuerySpec& query, int k) {
  if (query.weights.size() == 0) return Eigen::VectorXd::Ones(k);
  if (query.weights.size() != k) {
    throw TypeError("query weights dimension mismatch");
  }
  return query.weights;
}

// Clip to [0,1] and renormalize onto the simplex.
Eigen::VectorXd ProjectFrequencies(const Eigen::VectorXd& raw) {
  Eigen::VectorXd clipped = raw.cwiseMax(0.0).cwiseMin(1.0);
  const double total = clipped.sum();
  if (total > 0.0) return clipped / total;
  return Eigen::VectorXd::Constant(raw.size(), 1.0 / raw.size());
}

EstimateReport Finalize(Eigen::VectorXd raw, int64_t n,
                        const QuerySpec& query) {
  EstimateReport report;
  report.n = n;
  report.raw_estimate = raw;
  report.estimate =
      query.kind == QueryKind::kFrequency ? ProjectFrequencies(raw) : raw;
  return report;
}

}  // namespace

std::string QueryKindName(QueryKind kind) {
  return kind == QueryKind::kFrequency ? "frequency" : "mean";
}

QueryKind QueryKindFromName(const std::string& name) {
  if (name == "frequency") return QueryKind::kFrequency;
  if (name == "mean") return QueryKind::kMean;
  throw ConfigError("unknown query kind: " + name);
}

EstimateReport BaselineEstimate(const std::vector<PerturbedReport>& reports,
                                const MechanismSpec& spec,
                                const QuerySpec& query) {
  if (reports.empty()) throw DomainError("BaselineEstimate: no reports");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(spec.dim);
  for (const auto& z : reports) sum += UnbiasedTransform(spec, z);
  sum /= static_cast<double>(reports.size());
  return Finalize(std::move(sum), static_cast<int64_t>(reports.size()), query);
}

Eigen::VectorXd RestoredToTransform(const MechanismSpec& spec,
                                    const SparseCode& code) {
  if (code.dim != spec.dim) {
    throw TypeError("RestoredToTransform: dimension mismatch");
  }
  if (spec.kind == MechanismKind::kKrr) {
    const double p = KrrTruthProb(spec.epsilon, spec.dim);
    const double q = KrrLieProb(spec.epsilon, spec.dim);
    Eigen::VectorXd t = Eigen::VectorXd::Constant(spec.dim, -q / (p - q));
    t[code.index] = (1.0 - q) / (p - q);
    return t;
  }
  return code.Dense();
}

EstimateReport PeelEstimate(const std::vector<SparseCode>& restored,
                            const MechanismSpec& spec,
                            const QuerySpec& query) {
  if (restored.empty()) throw DomainError("PeelEstimate: no restored codes");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(spec.dim);
  for (const auto& code : restored) sum += RestoredToTransform(spec, code);
  sum /= static_cast<double>(restored.size());
  return Finalize(std::move(sum), static_cast<int64_t>(restored.size()), query);
}

Eigen::VectorXd PopulationTruth(const std::vector<RawRecord>& population,
                                const MechanismSpec& spec,
                                const QuerySpec& query) {
  if (population.empty()) throw DomainError("PopulationTruth: empty population");
  Eigen::VectorXd truth = Eigen::VectorXd::Zero(spec.dim);
  if (query.kind == QueryKind::kFrequency) {
    for (const auto& x : population) {
      const int* cat = std::get_if<int>(&x);
      if (cat == nullptr || *cat < 0 || *cat >= spec.dim) {
        throw DomainError("PopulationTruth: bad category record");
      }
      truth[*cat] += 1.0;
    }
  } else {
    for (const auto& x : population) {
      const auto* vec = std::get_if<Eigen::VectorXd>(&x);
      if (vec == nullptr || vec->size() != spec.dim) {
        throw DomainError("PopulationTruth: bad numeric record");
      }
      truth += *vec;
    }
  }
  return truth / static_cast<double>(population.size());
}

VarianceDecomposition RunVarianceDecomposition(
    const MechanismSpec& spec, const QuerySpec& query,
    const std::vector<RawRecord>& population, int trials,
    const AllocationPolicy& allocation, uint64_t seed) {
  if (trials < 2) {
    throw ConfigError("RunVarianceDecomposition: need at least 2 trials");
  }
  const auto n = static_cast<int64_t>(population.size());
  if (n == 0) throw DomainError("RunVarianceDecomposition: empty population");

  const Eigen::VectorXd truth = PopulationTruth(population, spec, query);
  const Eigen::VectorXd weights = EffectiveWeights(query, spec.dim);
  const Eigen::VectorXd weights_sq = weights.array().square();

  // Run the full structural loop rather than shortcutting it; the codec
  // seed only has to be shared between the encode and decode sides.
  const StructuralCodec codec = BuildCodec(spec.dim, MixSeed(seed, 0xc0dec));

  std::vector<double> diff(trials);
  double mse_base_sum = 0.0;
  double mse_peel_sum = 0.0;
  double condvar_sum = 0.0;
  int64_t condvar_count = 0;

  for (int trial = 0; trial < trials; ++trial) {
    const uint64_t trial_seed = MixSeed(seed, static_cast<uint64_t>(trial));
    Eigen::VectorXd base_sum = Eigen::VectorXd::Zero(spec.dim);
    Eigen::VectorXd peel_sum = Eigen::VectorXd::Zero(spec.dim);
    int64_t peel_count = 0;
    for (int64_t i = 0; i < n; ++i) {
      Rng rng = Rng::ChildStream(trial_seed, static_cast<uint64_t>(i));
      const PerturbedReport z = Perturb(spec, population[i], rng);
      base_sum += UnbiasedTransform(spec, z);

      const Eigen::VectorXd input = SparsifierInput(spec, z);
      if (!spec.is_one_sparse) {
        const Eigen::VectorXd t = input;
        if ((t.array() != 0.0).any()) {
          const Eigen::VectorXd p = AllocationProbabilities(t, allocation);
          double var = 0.0;
          for (int j = 0; j < spec.dim; ++j) {
            if (p[j] > 0.0) {
              var += weights_sq[j] * t[j] * t[j] * (1.0 / p[j] - 1.0);
            }
          }
          condvar_sum += var;
        }
        ++condvar_count;
      } else {
        ++condvar_count;  // identity path contributes zero variance
      }

      const auto code = Sparsify(input, spec, allocation, rng);
      if (!code.has_value()) continue;
      const SparseCode roundtrip =
          Restore(Reconstruct(codec, Encode(codec, *code)), code->magnitude);
      peel_sum += RestoredToTransform(spec, roundtrip);
      ++peel_count;
    }
    const Eigen::VectorXd base_est = base_sum / static_cast<double>(n);
    const Eigen::VectorXd peel_est =
        peel_sum / static_cast<double>(peel_count > 0 ? peel_count : 1);
    const double sq_base =
        (weights_sq.array() * (base_est - truth).array().square()).sum();
    const double sq_peel =
        (weights_sq.array() * (peel_est - truth).array().square()).sum();
    mse_base_sum += sq_base;
    mse_peel_sum += sq_peel;
    diff[trial] = sq_peel - sq_base;
  }

  VarianceDecomposition out;
  out.mse_baseline = mse_base_sum / trials;
  out.mse_peel = mse_peel_sum / trials;
  double mean_diff = 0.0;
  for (double d : diff) mean_diff += d;
  mean_diff /= trials;
  out.delta_n_empirical = mean_diff;
  double var_diff = 0.0;
  for (double d : diff) var_diff += (d - mean_diff) * (d - mean_diff);
  var_diff /= (trials - 1);
  out.se_difference = std::sqrt(var_diff / trials);
  out.delta_n_analytic =
      condvar_count > 0
          ? (condvar_sum / static_cast<double>(condvar_count)) /
                static_cast<double>(n)
          : 0.0;
  return out;
}

}  // namespace peel
