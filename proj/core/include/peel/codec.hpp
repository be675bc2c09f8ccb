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

#ifndef PEEL_CODEC_H_
#define PEEL_CODEC_H_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/LU>

#include "peel/rng.hpp"
#include "peel/sparsifier.hpp"

namespace peel {

// A normalized 1-sparse code. The dense rendering has value
// sign * sqrt(k-1) at `index` and -sign / sqrt(k-1) elsewhere, so it is
// mean-zero with l2 norm sqrt(k). Magnitude never appears here: the z-score
// is scale invariant, so the rendering depends only on (index, sign).
struct NormalizedCode {
  int dim = 0;
  int index = 0;
  int sign = +1;

  Eigen::VectorXd Dense() const;
};

// The transmitted object: the projected vector y of length k-1 plus the
// magnitude sidecar carried unmodified from the sparse code.
struct EncodedVector {
  Eigen::VectorXd y;
  double magnitude_sidecar = 0.0;
  int64_t client_id = -1;
};

// The transform bundle for a fixed (k, seed): orthonormal basis W of the
// mean-zero hyperplane, Gaussian projection Phi, composite Theta = Phi W,
// its inverse, the reconstruction operator Gamma = W Theta^-1, and the 2k
// admissible normalized patterns. Immutable after construction; clients and
// the aggregator rebuild an identical codec from (k, seed) alone.
struct StructuralCodec {
  int dim = 0;
  uint64_t seed = 0;
  Eigen::MatrixXd w;          // k x (k-1), columns orthonormal, mean-zero
  Eigen::MatrixXd phi;        // (k-1) x k, iid standard normal
  Eigen::MatrixXd theta;      // (k-1) x (k-1) = phi * w
  Eigen::MatrixXd theta_inv;  // refined inverse of theta
  Eigen::MatrixXd gamma;      // k x (k-1) = w * theta_inv
  // LU factorization of theta; reconstruction solves against it with one
  // refinement step, which keeps the loop exact even for ill-conditioned
  // draws that the 1e8 rejection bound still admits.
  Eigen::PartialPivLU<Eigen::MatrixXd> theta_lu;
  std::vector<NormalizedCode> patterns;  // 2k, index-major, + before -
  double cond_theta = 0.0;
  int resample_count = 0;  // how many Phi draws were rejected
};

// Builds the codec. Phi is drawn from a generator seeded by `seed`; if the
// condition number of Theta reaches 1e8 the draw is rejected and retried
// with seed+1, up to 8 retries, after which construction fails.
StructuralCodec BuildCodec(int k, uint64_t seed);

// Deterministic Helmert-style orthonormal basis of {x : sum x_i = 0}.
Eigen::MatrixXd HelmertBasis(int k);

// All 2k admissible normalized codes in deterministic order.
std::vector<NormalizedCode> AdmissiblePatterns(int k);

// Z-score normalization of a 1-sparse code (population standard deviation,
// divisor k). Magnitude is discarded from the rendering.
NormalizedCode Normalize(const SparseCode& s);

// Matrix-vector product with extended-precision accumulation. The encode
// and reconstruct paths both run through ill-conditioned operators when the
// Gaussian draw is unlucky; plain double accumulation can push the closed
// loop past its 1e-9 budget.
Eigen::VectorXd ProjectVector(const Eigen::MatrixXd& m,
                              const Eigen::VectorXd& v);

// y = Phi * dense(Normalize(s)); the magnitude travels in the sidecar.
EncodedVector Encode(const StructuralCodec& codec, const SparseCode& s);

// shat = Gamma * y. Always lands in span(W) (mean-zero) up to roundoff.
Eigen::VectorXd Reconstruct(const StructuralCodec& codec,
                            const Eigen::VectorXd& y);
Eigen::VectorXd Reconstruct(const StructuralCodec& codec,
                            const EncodedVector& encoded);

// Recovers the sparse code from a reconstruction: index = argmax |shat_j|
// (lowest index on ties), sign from that coordinate, magnitude from the
// sidecar. Throws RestorationError on an all-zero input.
SparseCode Restore(const Eigen::VectorXd& shat, double magnitude_sidecar);

// Transmission quantizer: rounds each coordinate of y to
// ceil(log2(k-1)) bits over the fixed range [-3 sqrt(k), 3 sqrt(k)].
struct Quantizer {
  int bits = 0;
  double lo = 0.0;
  double step = 0.0;

  static Quantizer ForDim(int k);
  double Apply(double value) const;
  Eigen::VectorXd Apply(const Eigen::VectorXd& y) const;
};

}  // namespace peel

#endif  // PEEL_CODEC_H_
