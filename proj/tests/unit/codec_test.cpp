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
#include <set>
#include <utility>

#include <Eigen/SVD>

#include "doctest.h"
#include "peel/errors.hpp"

namespace peel {
namespace {

TEST_CASE("helmert basis at k=3 matches the closed form") {
  const Eigen::MatrixXd w = HelmertBasis(3);
  CHECK(w(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(w(1, 0) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(w(2, 0) == doctest::Approx(0.0));
  CHECK(w(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(w(1, 1) == doctest::Approx(1.0 / std::sqrt(6.0)));
  CHECK(w(2, 1) == doctest::Approx(-2.0 / std::sqrt(6.0)));
}

TEST_CASE("basis is orthonormal and spans exactly the mean-zero hyperplane") {
  for (int k : {3, 5, 16, 64}) {
    const Eigen::MatrixXd w = HelmertBasis(k);
    const Eigen::MatrixXd gram = w.transpose() * w;
    CHECK((gram - Eigen::MatrixXd::Identity(k - 1, k - 1))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    // Every column orthogonal to the all-ones vector.
    CHECK((Eigen::RowVectorXd::Ones(k) * w).cwiseAbs().maxCoeff() < 1e-10);

    // Both inclusions: mean-zero vectors project onto span(W) exactly, the
    // all-ones direction projects to nothing.
    Rng rng(k);
    const Eigen::MatrixXd projector = w * w.transpose();
    for (int trial = 0; trial < 100; ++trial) {
      Eigen::VectorXd v(k);
      for (int j = 0; j < k; ++j) v[j] = rng.NextGaussian();
      v.array() -= v.mean();
      CHECK((projector * v - v).norm() <= 1e-9 * std::max(1.0, v.norm()));
    }
    CHECK((projector * Eigen::VectorXd::Ones(k)).norm() <= 1e-9);
  }
}

TEST_CASE("admissible patterns: count, order, geometry") {
  const auto patterns = AdmissiblePatterns(3);
  REQUIRE(patterns.size() == 6);
  CHECK(patterns[0].index == 0);
  CHECK(patterns[0].sign == +1);
  CHECK(patterns[1].index == 0);
  CHECK(patterns[1].sign == -1);
  CHECK(patterns[2].index == 1);

  std::set<std::pair<int, int>> seen;
  for (const auto& p : patterns) {
    const Eigen::VectorXd dense = p.Dense();
    CHECK(std::abs(dense.sum()) < 1e-10);
    CHECK(dense.norm() == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    seen.insert({p.index, p.sign});
  }
  CHECK(seen.size() == 6);  // pairwise distinct

  CHECK_THROWS_AS(AdmissiblePatterns(2), DomainError);
}

TEST_CASE("normalize reproduces the z-score closed form") {
  // k=4, positive sign at index 1.
  const SparseCode s{4, 1, +1, 2.5};
  const Eigen::VectorXd dense = Normalize(s).Dense();
  const double major = std::sqrt(3.0);
  const double minor = -1.0 / std::sqrt(3.0);
  CHECK(dense[0] == doctest::Approx(minor));
  CHECK(dense[1] == doctest::Approx(major));
  CHECK(dense[2] == doctest::Approx(minor));
  CHECK(dense[3] == doctest::Approx(minor));

  // Magnitude is discarded: different magnitudes, same rendering.
  const SparseCode unit{4, 1, +1, 1.0};
  const SparseCode big{4, 1, +1, 6.4939};
  CHECK(Normalize(unit).Dense() == Normalize(big).Dense());

  // Oracle: explicit population z-score of the dense sparse vector.
  const Eigen::VectorXd raw = s.Dense();
  const double mean = raw.mean();
  const double sd = std::sqrt((raw.array() - mean).square().sum() / 4.0);
  const Eigen::VectorXd zscored = (raw.array() - mean) / sd;
  CHECK((zscored - dense).cwiseAbs().maxCoeff() < 1e-12);

  // Normalized codes sum to zero and have norm sqrt(k).
  CHECK(std::abs(dense.sum()) < 1e-10);
  CHECK(dense.norm() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("codec construction invariants") {
  const StructuralCodec codec = BuildCodec(8, 42);
  CHECK(codec.dim == 8);
  CHECK(codec.patterns.size() == 16);
  CHECK(codec.cond_theta < 1e8);
  CHECK((codec.theta - codec.phi * codec.w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((codec.theta * codec.theta_inv - Eigen::MatrixXd::Identity(7, 7))
            .cwiseAbs()
            .maxCoeff() < 1e-10);

  // Gamma Phi acts as the identity on span(W), column by column.
  const Eigen::MatrixXd round = codec.gamma * codec.phi * codec.w;
  for (int col = 0; col < 7; ++col) {
    CHECK((round.col(col) - codec.w.col(col)).norm() <= 1e-9);
  }

  CHECK_THROWS_AS(BuildCodec(2, 1), DomainError);
}

TEST_CASE("closed loop is the identity on every admissible pattern") {
  for (int k = 3; k <= 64; ++k) {
    for (uint64_t seed : {1ULL, 42ULL, 90210ULL}) {
      const StructuralCodec codec = BuildCodec(k, seed);
      for (const auto& pattern : codec.patterns) {
        const SparseCode s{k, pattern.index, pattern.sign, 1.0};
        const EncodedVector enc = Encode(codec, s);
        const Eigen::VectorXd shat = Reconstruct(codec, enc);
        CHECK((shat - pattern.Dense()).norm() <= 1e-9);
        const SparseCode back = Restore(shat, enc.magnitude_sidecar);
        CHECK(back.index == pattern.index);
        CHECK(back.sign == pattern.sign);
        CHECK(back.magnitude == 1.0);
      }
    }
  }
}

TEST_CASE("encode is injective on the admissible set") {
  for (int k : {3, 16, 64}) {
    const StructuralCodec codec = BuildCodec(k, 7);
    std::vector<Eigen::VectorXd> encodings;
    for (const auto& pattern : codec.patterns) {
      encodings.push_back(
          Encode(codec, SparseCode{k, pattern.index, pattern.sign, 1.0}).y);
    }
    for (size_t a = 0; a < encodings.size(); ++a) {
      for (size_t b = a + 1; b < encodings.size(); ++b) {
        CHECK((encodings[a] - encodings[b]).norm() > 1e-6);
      }
    }
  }
}

TEST_CASE("reconstruction is linear and lands in the mean-zero subspace") {
  const StructuralCodec codec = BuildCodec(6, 3);
  CHECK(Reconstruct(codec, Eigen::VectorXd::Zero(5)).norm() == 0.0);

  const SparseCode s{6, 2, -1, 1.0};
  const EncodedVector enc = Encode(codec, s);
  Rng rng(8);
  Eigen::VectorXd delta(5);
  for (int j = 0; j < 5; ++j) delta[j] = rng.NextGaussian();
  const Eigen::VectorXd shat = Reconstruct(codec, enc.y + delta);
  const Eigen::VectorXd expected =
      Normalize(s).Dense() + codec.gamma * delta;
  CHECK((shat - expected).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(shat.sum()) < 1e-9);  // mean-zero

  CHECK_THROWS_AS(Reconstruct(codec, Eigen::VectorXd::Zero(4)), TypeError);
}

TEST_CASE("restore recovers index and sign") {
  Eigen::VectorXd shat(4);
  shat << -0.5774, 1.7321, -0.5774, -0.5774;
  const SparseCode code = Restore(shat, 1.0);
  CHECK(code.dim == 4);
  CHECK(code.index == 1);
  CHECK(code.sign == +1);
  CHECK(code.magnitude == 1.0);

  const SparseCode flipped = Restore(-shat, 2.5);
  CHECK(flipped.index == 1);
  CHECK(flipped.sign == -1);
  CHECK(flipped.magnitude == 2.5);

  // Ties break to the lowest index.
  Eigen::VectorXd tie(4);
  tie << 0.5, -0.5, 0.1, 0.0;
  CHECK(Restore(tie, 1.0).index == 0);

  CHECK_THROWS_AS(Restore(Eigen::VectorXd::Zero(4), 1.0), RestorationError);
}

TEST_CASE("theta is full rank over many seeds, no resampling needed") {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    const StructuralCodec codec = BuildCodec(32, seed);
    CHECK(codec.resample_count == 0);
  }
}

TEST_CASE("projection amplification is bracketed by the singular values") {
  const StructuralCodec codec = BuildCodec(12, 5);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(codec.phi);
  const double c2 = svd.singularValues()(0) * svd.singularValues()(0);
  const double c1 = svd.singularValues().tail(1)(0) *
                    svd.singularValues().tail(1)(0);
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd e(12);
    for (int j = 0; j < 12; ++j) e[j] = rng.NextGaussian();
    const double ratio = (codec.phi * e).squaredNorm() / e.squaredNorm();
    CHECK(ratio >= c1 * (1.0 - 1e-9));
    CHECK(ratio <= c2 * (1.0 + 1e-9));
  }
}

TEST_CASE("quantizer rounds within the fixed range") {
  const Quantizer q = Quantizer::ForDim(16);
  CHECK(q.bits == 4);  // ceil(log2(15))
  const double range = 3.0 * std::sqrt(16.0);
  CHECK(q.lo == doctest::Approx(-range));
  CHECK(q.step == doctest::Approx(2.0 * range / 16.0));
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.NextUniform(-range, range);
    const double rounded = q.Apply(v);
    CHECK(std::abs(rounded - v) <= q.step / 2 + 1e-12);
  }
  // Out-of-range values clamp to the edge cells.
  CHECK(q.Apply(1e9) == doctest::Approx(range - q.step / 2));
  CHECK(q.Apply(-1e9) == doctest::Approx(-range + q.step / 2));
}

}  // namespace
}  // namespace peel
