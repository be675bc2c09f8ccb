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

#include <cmath>

#include "doctest.h"
#include "peel/attacks.hpp"
#include "peel/errors.hpp"

namespace peel {
namespace {

EncodedVector BenignEncoded(const StructuralCodec& codec,
                            const MechanismSpec& spec, const RawRecord& x,
                            Rng& rng) {
  const PerturbedReport z = Perturb(spec, x, rng);
  const auto code =
      Sparsify(SparsifierInput(spec, z), spec, AllocationPolicy{}, rng);
  REQUIRE(code.has_value());
  return Encode(codec, *code);
}

TEST_CASE("tau threshold closed form") {
  // sigma^2/c = 1: alpha = 2/e gives tau = 1, alpha = 2/e^4 gives tau = 2.
  CHECK(TauThreshold(1.0, 1.0, 2.0 / std::exp(1.0)) == doctest::Approx(1.0));
  CHECK(TauThreshold(1.0, 1.0, 2.0 / std::exp(4.0)) == doctest::Approx(2.0));
  CHECK(TauThreshold(0.0, 1.0, 0.5) == doctest::Approx(1e-6));
  CHECK_THROWS_AS(TauThreshold(1.0, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(TauThreshold(1.0, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(TauThreshold(1.0, 0.0, 0.5), ConfigError);
}

TEST_CASE("pattern residual of admissible and degenerate inputs") {
  const StructuralCodec codec = BuildCodec(4, 11);
  for (const auto& pattern : codec.patterns) {
    const PatternMatch match = NearestPattern(codec, pattern.Dense());
    CHECK(match.residual <= 1e-9);
    CHECK(match.index == pattern.index);
    CHECK(match.sign == pattern.sign);
  }
  // The zero vector is equidistant from all patterns at distance sqrt(k);
  // the tie resolves to the first pattern in order.
  const PatternMatch zero = NearestPattern(codec, Eigen::VectorXd::Zero(4));
  CHECK(zero.residual == doctest::Approx(2.0));
  CHECK(zero.index == 0);
  CHECK(zero.sign == +1);
}

TEST_CASE("small additive perturbations on y always leave the pattern set") {
  const int k = 16;
  const StructuralCodec codec = BuildCodec(k, 21);
  Rng rng(33);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& pattern = codec.patterns[trial % codec.patterns.size()];
    const EncodedVector enc =
        Encode(codec, SparseCode{k, pattern.index, pattern.sign, 1.0});
    Eigen::VectorXd delta(k - 1);
    for (int j = 0; j < k - 1; ++j) delta[j] = rng.NextGaussian();
    delta *= 0.5 / delta.norm();
    const PatternMatch match =
        NearestPattern(codec, Reconstruct(codec, enc.y + delta));
    CHECK(match.residual > 1e-6);
  }
}

TEST_CASE("benign krr records pass both channels") {
  const auto spec = MakeMechanismSpec(MechanismKind::kKrr, 1.0, 8);
  const StructuralCodec codec = BuildCodec(8, 5);
  CalibrationOptions copts;
  copts.records = 2000;
  const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
  CHECK(policy.tau_pattern == doctest::Approx(1e-6));  // floored
  Rng rng(71);
  for (int i = 0; i < 5000; ++i) {
    const EncodedVector enc =
        BenignEncoded(codec, spec, static_cast<int>(rng.NextInt(8)), rng);
    const DetectionVerdict verdict = Classify(codec, enc, spec, policy);
    CHECK_FALSE(verdict.flagged);
    CHECK(verdict.pattern_residual <= 1e-9);
    CHECK(verdict.magnitude_residual == 0.0);
  }
}

TEST_CASE("output poisoning on y is flagged near-certainly") {
  const int k = 16;
  const auto spec = MakeMechanismSpec(MechanismKind::kKrr, 1.0, k);
  const StructuralCodec codec = BuildCodec(k, 9);
  CalibrationOptions copts;
  copts.records = 2000;
  const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
  Rng rng(55);
  int flagged = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    EncodedVector enc =
        BenignEncoded(codec, spec, static_cast<int>(rng.NextInt(k)), rng);
    // Unit-norm additive perturbation on the transmitted vector.
    Eigen::VectorXd delta(k - 1);
    for (int j = 0; j < k - 1; ++j) delta[j] = rng.NextGaussian();
    enc.y += delta / delta.norm();
    if (Classify(codec, enc, spec, policy).flagged) ++flagged;
  }
  CHECK(static_cast<double>(flagged) / trials >= 0.999);
}

TEST_CASE("budget-tampered harmony magnitudes are flagged analytically") {
  const auto spec = MakeMechanismSpec(MechanismKind::kHarmony, 1.0, 5);
  const StructuralCodec codec = BuildCodec(5, 13);
  CalibrationOptions copts;
  copts.records = 1000;
  const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
  CHECK(policy.magnitude_in_budget_units);
  CHECK(policy.tau_mag == doctest::Approx(0.1));

  // A record produced under eps' = 2 eps carries C(2 eps), at implied-budget
  // deviation 1.0 > 0.1.
  const auto poisoned_spec = MakeMechanismSpec(MechanismKind::kHarmony, 2.0, 5);
  Rng rng(3);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
  const PerturbedReport z = Perturb(poisoned_spec, x, rng);
  const auto code =
      Sparsify(SparsifierInput(spec, z), spec, AllocationPolicy{}, rng);
  const EncodedVector enc = Encode(codec, *code);
  const DetectionVerdict verdict = Classify(codec, enc, spec, policy);
  CHECK(verdict.flagged);
  CHECK(verdict.magnitude_residual == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(verdict.pattern_residual <= 1e-9);  // still a valid pattern

  // An untampered record is clean.
  const PerturbedReport z_ok = Perturb(spec, x, rng);
  const auto code_ok =
      Sparsify(SparsifierInput(spec, z_ok), spec, AllocationPolicy{}, rng);
  CHECK_FALSE(Classify(codec, Encode(codec, *code_ok), spec, policy).flagged);
}

TEST_CASE("no false positives at scale for discrete codebooks") {
  const int records = 100000;
  {
    const auto spec = MakeMechanismSpec(MechanismKind::kKrr, 1.0, 8);
    const StructuralCodec codec = BuildCodec(8, 45);
    CalibrationOptions copts;
    copts.records = 2000;
    const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
    Rng rng(46);
    int flagged = 0;
    for (int i = 0; i < records; ++i) {
      const EncodedVector enc =
          BenignEncoded(codec, spec, static_cast<int>(rng.NextInt(8)), rng);
      flagged += Classify(codec, enc, spec, policy).flagged ? 1 : 0;
    }
    CHECK(flagged == 0);
  }
  {
    const auto spec = MakeMechanismSpec(MechanismKind::kHarmony, 1.0, 8);
    const StructuralCodec codec = BuildCodec(8, 45);
    CalibrationOptions copts;
    copts.records = 2000;
    const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
    Rng rng(47);
    int flagged = 0;
    for (int i = 0; i < records; ++i) {
      Eigen::VectorXd x(8);
      for (int j = 0; j < 8; ++j) x[j] = rng.NextUniform(-1.0, 1.0);
      const EncodedVector enc = BenignEncoded(codec, spec, x, rng);
      flagged += Classify(codec, enc, spec, policy).flagged ? 1 : 0;
    }
    CHECK(flagged == 0);
  }
}

TEST_CASE("laplace benign flag rate stays near alpha") {
  const auto spec = MakeMechanismSpec(MechanismKind::kLaplace, 1.0, 16);
  const StructuralCodec codec = BuildCodec(16, 17);
  CalibrationOptions copts;
  copts.alpha = 0.001;
  copts.records = 50000;
  const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
  Rng rng(41);
  int flagged = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    Eigen::VectorXd x(16);
    for (int j = 0; j < 16; ++j) x[j] = rng.NextUniform(-1.0, 1.0);
    const EncodedVector enc = BenignEncoded(codec, spec, x, rng);
    if (Classify(codec, enc, spec, policy).flagged) ++flagged;
  }
  const double rate = static_cast<double>(flagged) / trials;
  const double se = std::sqrt(copts.alpha * (1 - copts.alpha) / trials);
  CHECK(rate <= copts.alpha + 2 * se);
}

TEST_CASE("flag rate is nondecreasing in the injected norm") {
  const int k = 16;
  const auto spec = MakeMechanismSpec(MechanismKind::kLaplace, 1.0, k);
  const StructuralCodec codec = BuildCodec(k, 19);
  CalibrationOptions copts;
  copts.records = 5000;
  const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
  double previous = -1.0;
  Rng rng(61);
  for (double norm : {0.01, 0.1, 0.5, 1.0}) {
    int flagged = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
      Eigen::VectorXd x(k);
      for (int j = 0; j < k; ++j) x[j] = rng.NextUniform(-1.0, 1.0);
      EncodedVector enc = BenignEncoded(codec, spec, x, rng);
      Eigen::VectorXd delta(k - 1);
      for (int j = 0; j < k - 1; ++j) delta[j] = rng.NextGaussian();
      enc.y += delta * (norm / delta.norm());
      if (Classify(codec, enc, spec, policy).flagged) ++flagged;
    }
    const double rate = static_cast<double>(flagged) / trials;
    CHECK(rate >= previous);
    previous = rate;
  }
  CHECK(previous >= 0.999);  // the strongest point is essentially certain
}

TEST_CASE("projection-matrix poisoning is exposed near-certainly") {
  const int k = 16;
  const auto spec = MakeMechanismSpec(MechanismKind::kKrr, 1.0, k);
  const StructuralCodec codec = BuildCodec(k, 23);
  CalibrationOptions copts;
  copts.records = 2000;
  const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
  Rng matrix_rng(29);
  const Eigen::MatrixXd phi_poisoned = ProjectionPoison(codec, 0.1, matrix_rng);
  Rng rng(31);
  int flagged = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    const PerturbedReport z =
        Perturb(spec, static_cast<int>(rng.NextInt(k)), rng);
    const auto code =
        Sparsify(SparsifierInput(spec, z), spec, AllocationPolicy{}, rng);
    EncodedVector enc;
    enc.y = phi_poisoned * Normalize(*code).Dense();
    enc.magnitude_sidecar = code->magnitude;
    if (Classify(codec, enc, spec, policy).flagged) ++flagged;
  }
  CHECK(static_cast<double>(flagged) / trials >= 0.999);
}

TEST_CASE("estimate ratio") {
  std::vector<DetectionVerdict> verdicts(100);
  CHECK(EstimateRatio(verdicts) == 0.0);
  for (int i = 0; i < 5; ++i) verdicts[i].flagged = true;
  CHECK(EstimateRatio(verdicts) == doctest::Approx(0.05));
  CHECK_THROWS_AS(EstimateRatio({}), DomainError);
}

TEST_CASE("verdict flag matches the two-channel invariant") {
  const auto spec = MakeMechanismSpec(MechanismKind::kLaplace, 1.0, 8);
  const StructuralCodec codec = BuildCodec(8, 37);
  CalibrationOptions copts;
  copts.records = 2000;
  const ThresholdPolicy policy = CalibratePolicy(codec, spec, copts);
  Rng rng(43);
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd x(8);
    for (int j = 0; j < 8; ++j) x[j] = rng.NextUniform(-1.0, 1.0);
    EncodedVector enc = BenignEncoded(codec, spec, x, rng);
    if (i % 3 == 0) enc.y[i % 7] += 0.5;  // some tampered records
    const DetectionVerdict v = Classify(codec, enc, spec, policy);
    CHECK(v.flagged == (v.pattern_residual > policy.tau_pattern ||
                        v.magnitude_residual > policy.tau_mag));
    CHECK(v.pattern_residual >= 0.0);
    CHECK(v.magnitude_residual >= 0.0);
  }
}

}  // namespace
}  // namespace peel
