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

#include "peel/detector.hpp"

#include <algorithm>
#include <cmath>

#include "peel/errors.hpp"

namespace peel {
namespace {

constexpr double kPatternFloor = 1e-6;

double Quantile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("Quantile: empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto idx = static_cast<size_t>(p * n);
  if (idx >= values.size()) idx = values.size() - 1;
  return values[idx];
}

}  // namespace

double TauThreshold(double sigma, double c, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("TauThreshold: alpha must lie in (0, 1)");
  }
  if (!(c > 0.0)) throw ConfigError("TauThreshold: c must be positive");
  if (sigma < 0.0) throw ConfigError("TauThreshold: sigma must be >= 0");
  if (sigma == 0.0) return kPatternFloor;
  return std::sqrt(sigma * sigma / c * std::log(2.0 / alpha));
}

PatternMatch NearestPattern(const StructuralCodec& codec,
                            const Eigen::VectorXd& shat) {
  const int k = codec.dim;
  if (shat.size() != k) {
    throw TypeError("NearestPattern: vector length does not match codec");
  }
  // ||shat - p(J, sign)||^2 = ||shat||^2 + k - 2 sign g_J with
  // g_J = k (shat_J - mean) / sqrt(k-1), so the argmin over the 2k patterns
  // is the largest sign g_J, scanned in the deterministic pattern order.
  // The winner's distance is then recomputed coordinate-wise: the closed
  // form cancels catastrophically when the residual is near zero.
  const double mean = shat.mean();
  PatternMatch best;
  double best_gain = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < k; ++j) {
    const double g = shat[j] - mean;
    for (int sign : {+1, -1}) {
      const double gain = sign * g;
      if (gain > best_gain) {
        best_gain = gain;
        best.index = j;
        best.sign = sign;
      }
    }
  }
  const NormalizedCode nearest{k, best.index, best.sign};
  best.residual = (shat - nearest.Dense()).norm();
  return best;
}

double MagnitudeResidual(const ThresholdPolicy& policy,
                         const MechanismSpec& spec, double sidecar) {
  if (!policy.codebook.empty()) {
    if (policy.magnitude_in_budget_units) {
      const double implied = HarmonyImpliedEpsilon(sidecar, spec.dim);
      if (!std::isfinite(implied)) {
        return std::numeric_limits<double>::infinity();
      }
      return std::abs(implied - spec.epsilon) / spec.epsilon;
    }
    double best = std::numeric_limits<double>::infinity();
    for (double v : policy.codebook) best = std::min(best, std::abs(sidecar - v));
    return best;
  }
  if (!(policy.mag_sigma > 0.0)) return 0.0;
  return std::abs(sidecar - policy.mag_mu) / policy.mag_sigma;
}

DetectionVerdict Classify(const StructuralCodec& codec,
                          const EncodedVector& encoded,
                          const MechanismSpec& spec,
                          const ThresholdPolicy& policy) {
  if (spec.dim != codec.dim) {
    throw TypeError("Classify: mechanism/codec dimension mismatch");
  }
  const Eigen::VectorXd shat = Reconstruct(codec, encoded);
  const PatternMatch match = NearestPattern(codec, shat);

  DetectionVerdict verdict;
  verdict.client_id = encoded.client_id;
  verdict.pattern_residual = match.residual;
  verdict.nearest_index = match.index;
  verdict.nearest_sign = match.sign;
  verdict.magnitude_residual =
      MagnitudeResidual(policy, spec, encoded.magnitude_sidecar);
  verdict.flagged = verdict.pattern_residual > policy.tau_pattern ||
                    verdict.magnitude_residual > policy.tau_mag;
  return verdict;
}

double EstimateRatio(const std::vector<DetectionVerdict>& verdicts) {
  if (verdicts.empty()) {
    throw DomainError("EstimateRatio: empty verdict list");
  }
  size_t flagged = 0;
  for (const auto& v : verdicts) flagged += v.flagged ? 1 : 0;
  return static_cast<double>(flagged) / static_cast<double>(verdicts.size());
}

ThresholdPolicy CalibratePolicy(const StructuralCodec& codec,
                                const MechanismSpec& spec,
                                const CalibrationOptions& options) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw ConfigError("CalibratePolicy: alpha must lie in (0, 1)");
  }
  if (options.records < 100) {
    throw ConfigError("CalibratePolicy: need at least 100 records");
  }

  ThresholdPolicy policy;
  policy.alpha = options.alpha;
  policy.budget_tolerance = options.budget_tolerance;

  const MagnitudeCodebook book = GetMagnitudeCodebook(spec);
  policy.codebook = book.values;
  policy.magnitude_in_budget_units =
      spec.kind == MechanismKind::kHarmony;

  // Benign reference run through the full client path.
  const AllocationPolicy allocation;
  const Quantizer quantizer = Quantizer::ForDim(codec.dim);
  std::vector<double> pattern_residuals;
  std::vector<double> sidecars;
  pattern_residuals.reserve(options.records);
  sidecars.reserve(options.records);
  for (int i = 0; i < options.records; ++i) {
    Rng rng = Rng::ChildStream(options.seed, static_cast<uint64_t>(i));
    RawRecord x;
    if (spec.kind == MechanismKind::kKrr || spec.kind == MechanismKind::kOue) {
      x = static_cast<int>(rng.NextInt(spec.dim));
    } else {
      Eigen::VectorXd v(spec.dim);
      for (int j = 0; j < spec.dim; ++j) v[j] = rng.NextUniform(-1.0, 1.0);
      x = std::move(v);
    }
    const PerturbedReport z = Perturb(spec, x, rng);
    const auto code = Sparsify(SparsifierInput(spec, z), spec, allocation, rng);
    if (!code.has_value()) continue;  // null report
    EncodedVector enc = Encode(codec, *code);
    if (options.quantized) enc.y = quantizer.Apply(enc.y);
    pattern_residuals.push_back(NearestPattern(codec, Reconstruct(codec, enc)).residual);
    sidecars.push_back(enc.magnitude_sidecar);
  }
  if (pattern_residuals.empty()) {
    throw ConstructionError("CalibratePolicy: calibration produced no records");
  }

  // Pattern threshold: empirical quantile with a floor that keeps pure
  // roundoff from ever flagging a record.
  double tau_pattern =
      std::max(kPatternFloor, Quantile(pattern_residuals, 1.0 - options.alpha));
  if (options.quantized) {
    tau_pattern = std::max(tau_pattern, 4.0 * quantizer.step);
  }
  if (!std::isnan(options.tau_pattern_override)) {
    tau_pattern = options.tau_pattern_override;
  }
  policy.tau_pattern = tau_pattern;
  policy.c_constant =
      spec.noise_scale > 0.0
          ? spec.noise_scale * spec.noise_scale * std::log(2.0 / options.alpha) /
                (tau_pattern * tau_pattern)
          : 1.0;

  // Magnitude threshold.
  if (options.disable_magnitude_channel) {
    policy.tau_mag = std::numeric_limits<double>::infinity();
  } else if (!policy.codebook.empty()) {
    policy.tau_mag =
        policy.magnitude_in_budget_units ? options.budget_tolerance : 1e-6;
  } else {
    double mu = 0.0;
    for (double s : sidecars) mu += s;
    mu /= static_cast<double>(sidecars.size());
    double var = 0.0;
    for (double s : sidecars) var += (s - mu) * (s - mu);
    var /= static_cast<double>(sidecars.size() - 1);
    policy.mag_mu = mu;
    policy.mag_sigma = std::sqrt(var);
    std::vector<double> studentized;
    studentized.reserve(sidecars.size());
    for (double s : sidecars) {
      studentized.push_back(std::abs(s - mu) / policy.mag_sigma);
    }
    // The empirical quantile is reliable down to about 10/records; smaller
    // alphas extrapolate along the sub-Gaussian sqrt(log) profile.
    const double alpha_floor =
        10.0 / static_cast<double>(studentized.size());
    const double alpha0 = std::max(options.alpha, alpha_floor);
    double tau_mag = Quantile(studentized, 1.0 - alpha0);
    if (options.alpha < alpha0) {
      tau_mag *= std::sqrt(std::log(2.0 / options.alpha) /
                           std::log(2.0 / alpha0));
    }
    policy.tau_mag = tau_mag;
  }
  if (!std::isnan(options.tau_mag_override)) {
    policy.tau_mag = options.tau_mag_override;
  }
  return policy;
}

}  // namespace peel
