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

#ifndef PEEL_DETECTOR_H_
#define PEEL_DETECTOR_H_

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "peel/codec.hpp"
#include "peel/mechanism.hpp"

namespace peel {

// Per-record verdict. `flagged` is exactly
//   pattern_residual > tau_pattern  ||  magnitude_residual > tau_mag.
struct DetectionVerdict {
  int64_t client_id = -1;
  double pattern_residual = 0.0;
  double magnitude_residual = 0.0;
  // Distance of the pre-encoding normalized vector from span(W); only
  // available when the simulator exposes that vector for diagnostics.
  std::optional<double> subspace_residual;
  int nearest_index = 0;
  int nearest_sign = +1;
  bool flagged = false;
};

// Thresholds plus the benign magnitude reference the residuals are
// measured against.
struct ThresholdPolicy {
  double alpha = 1e-3;
  double c_constant = 1.0;
  double tau_pattern = 1e-6;
  // +inf disables the magnitude channel.
  double tau_mag = 1e-6;

  // Magnitude reference. A nonempty codebook means the mechanism has
  // discrete admissible magnitudes; otherwise the sidecar is studentized
  // against (mag_mu, mag_sigma).
  std::vector<double> codebook;
  double mag_mu = 0.0;
  double mag_sigma = 1.0;
  // For budget-bearing discrete magnitudes (Harmony), the residual is the
  // relative deviation of the implied budget, and tau_mag equals this
  // tolerance.
  bool magnitude_in_budget_units = false;
  double budget_tolerance = 0.1;
};

// Confidence threshold tau = sqrt((sigma^2 / c) * log(2 / alpha)); returns
// the 1e-6 floor when sigma is zero (discrete mechanisms).
double TauThreshold(double sigma, double c, double alpha);

// Minimum l2 distance from shat to the 2k admissible patterns, together
// with the nearest (index, sign). Ties resolve to the lowest pattern order
// (index-major, + before -).
struct PatternMatch {
  double residual = 0.0;
  int index = 0;
  int sign = +1;
};
PatternMatch NearestPattern(const StructuralCodec& codec,
                            const Eigen::VectorXd& shat);

// Magnitude-channel residual for a sidecar under the policy's reference.
double MagnitudeResidual(const ThresholdPolicy& policy,
                         const MechanismSpec& spec, double sidecar);

// Full per-record verification: reconstruct, match against the admissible
// set, check the magnitude sidecar, and flag.
DetectionVerdict Classify(const StructuralCodec& codec,
                          const EncodedVector& encoded,
                          const MechanismSpec& spec,
                          const ThresholdPolicy& policy);

// Fraction of flagged records. Throws DomainError on an empty list.
double EstimateRatio(const std::vector<DetectionVerdict>& verdicts);

// Options for the empirical calibration of a ThresholdPolicy.
struct CalibrationOptions {
  double alpha = 1e-3;
  int records = 10000;
  uint64_t seed = 0x5ca1ab1e;
  double budget_tolerance = 0.1;
  // Manual overrides; NaN means "derive".
  double tau_pattern_override = std::numeric_limits<double>::quiet_NaN();
  double tau_mag_override = std::numeric_limits<double>::quiet_NaN();
  bool disable_magnitude_channel = false;
  // Raise tau_pattern for quantized transmission (4x the quantization step).
  bool quantized = false;
};

// Runs `records` benign records of the declared mechanism through the full
// client path and sets the thresholds from the empirical residuals: the
// pattern threshold is the (1-alpha) quantile of the benign pattern
// residual, floored at 1e-6; the magnitude threshold is the (1-alpha)
// quantile of the studentized sidecar for unconstrained mechanisms, the
// budget tolerance for Harmony, and 1e-6 for kRR. c is back-solved so that
// TauThreshold reproduces the pattern threshold.
ThresholdPolicy CalibratePolicy(const StructuralCodec& codec,
                                const MechanismSpec& spec,
                                const CalibrationOptions& options);

}  // namespace peel

#endif  // PEEL_DETECTOR_H_
