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

#include "peel/mechanism.hpp"

#include <cmath>
#include <limits>

#include "peel/errors.hpp"

namespace peel {
namespace {

const Eigen::VectorXd& VectorPayload(const PerturbedReport& z,
                                     const char* where) {
  const auto* vec = std::get_if<Eigen::VectorXd>(&z.payload);
  if (vec == nullptr) {
    throw TypeError(std::string(where) + ": report carries no vector payload");
  }
  return *vec;
}

void CheckNumericDomain(const Eigen::VectorXd& x, int dim, const char* where) {
  if (x.size() != dim) {
    throw DomainError(std::string(where) + ": record has " +
                      std::to_string(x.size()) + " attributes, expected " +
                      std::to_string(dim));
  }
  for (int j = 0; j < dim; ++j) {
    if (!(x[j] >= -1.0 && x[j] <= 1.0)) {
      throw DomainError(std::string(where) + ": attribute " +
                        std::to_string(j) + " outside [-1, 1]");
    }
  }
}

int CategoryInput(const RawRecord& x, int dim, const char* where) {
  const int* cat = std::get_if<int>(&x);
  if (cat == nullptr) {
    throw DomainError(std::string(where) + ": expected a category record");
  }
  if (*cat < 0 || *cat >= dim) {
    throw DomainError(std::string(where) + ": category " +
                      std::to_string(*cat) + " outside [0, " +
                      std::to_string(dim) + ")");
  }
  return *cat;
}

}  // namespace

std::string MechanismKindName(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kKrr:
      return "krr";
    case MechanismKind::kHarmony:
      return "harmony";
    case MechanismKind::kLaplace:
      return "laplace";
    case MechanismKind::kOue:
      return "oue";
  }
  return "unknown";
}

MechanismKind MechanismKindFromName(const std::string& name) {
  if (name == "krr") return MechanismKind::kKrr;
  if (name == "harmony") return MechanismKind::kHarmony;
  if (name == "laplace") return MechanismKind::kLaplace;
  if (name == "oue") return MechanismKind::kOue;
  throw ConfigError("unknown mechanism kind: " + name);
}

// The closed forms are written in exp(-epsilon) so they stay finite for
// arbitrarily large budgets.
double KrrTruthProb(double epsilon, int k) {
  const double em = std::exp(-epsilon);
  return 1.0 / (1.0 + (k - 1.0) * em);
}

double KrrLieProb(double epsilon, int k) {
  const double em = std::exp(-epsilon);
  return em / (1.0 + (k - 1.0) * em);
}

double OueKeepProb() { return 0.5; }

double OueFlipProb(double epsilon) {
  const double em = std::exp(-epsilon);
  return em / (1.0 + em);
}

double HarmonyConstant(double epsilon, int k) {
  const double em = std::exp(-epsilon);
  return k * (1.0 + em) / (1.0 - em);
}

double HarmonyImpliedEpsilon(double magnitude, int k) {
  const double u = magnitude / k;
  if (!(u > 1.0)) return std::numeric_limits<double>::infinity();
  return std::log((u + 1.0) / (u - 1.0));
}

double LaplaceNoiseScale(double epsilon, int dim) {
  return 2.0 * dim / epsilon;
}

MechanismSpec MakeMechanismSpec(MechanismKind kind, double epsilon, int dim) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw ConfigError("mechanism epsilon must be positive and finite");
  }
  if (dim < 3) {
    throw ConfigError("mechanism dim must be >= 3, got " +
                      std::to_string(dim));
  }
  MechanismSpec spec;
  spec.kind = kind;
  spec.epsilon = epsilon;
  spec.dim = dim;
  switch (kind) {
    case MechanismKind::kKrr:
      spec.is_one_sparse = true;
      spec.sign_symmetric = false;
      spec.noise_scale = 0.0;
      break;
    case MechanismKind::kHarmony:
      spec.is_one_sparse = true;
      spec.sign_symmetric = true;
      spec.noise_scale = 0.0;
      break;
    case MechanismKind::kLaplace:
      spec.is_one_sparse = false;
      spec.sign_symmetric = true;
      spec.noise_scale = LaplaceNoiseScale(epsilon, dim);
      break;
    case MechanismKind::kOue:
      spec.is_one_sparse = false;
      spec.sign_symmetric = false;
      spec.noise_scale = 0.0;
      break;
  }
  spec.calib_delta = 3.0 * spec.noise_scale;
  spec.calib_eta = 0.01;
  return spec;
}

PerturbedReport Perturb(const MechanismSpec& spec, const RawRecord& x,
                        Rng& rng) {
  if (!(spec.epsilon > 0.0)) {
    throw ConfigError("Perturb: nonpositive epsilon");
  }
  PerturbedReport report;
  report.spec = spec;
  const int k = spec.dim;
  switch (spec.kind) {
    case MechanismKind::kKrr: {
      const int truth = CategoryInput(x, k, "Perturb[krr]");
      const double p = KrrTruthProb(spec.epsilon, k);
      if (rng.NextBernoulli(p)) {
        report.payload = truth;
      } else {
        // Uniform over the k-1 other categories.
        int other = static_cast<int>(rng.NextInt(k - 1));
        if (other >= truth) ++other;
        report.payload = other;
      }
      break;
    }
    case MechanismKind::kHarmony: {
      const auto* vec = std::get_if<Eigen::VectorXd>(&x);
      if (vec == nullptr) {
        throw DomainError("Perturb[harmony]: expected a numeric record");
      }
      CheckNumericDomain(*vec, k, "Perturb[harmony]");
      const int j = static_cast<int>(rng.NextInt(k));
      const double em = std::exp(-spec.epsilon);
      const double p_plus =
          ((*vec)[j] * (1.0 - em) + 1.0 + em) / (2.0 * (1.0 + em));
      const double c = HarmonyConstant(spec.epsilon, k);
      Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
      out[j] = rng.NextBernoulli(p_plus) ? c : -c;
      report.payload = std::move(out);
      break;
    }
    case MechanismKind::kLaplace: {
      const auto* vec = std::get_if<Eigen::VectorXd>(&x);
      if (vec == nullptr) {
        throw DomainError("Perturb[laplace]: expected a numeric record");
      }
      CheckNumericDomain(*vec, k, "Perturb[laplace]");
      const double scale = LaplaceNoiseScale(spec.epsilon, k);
      Eigen::VectorXd out(k);
      for (int j = 0; j < k; ++j) out[j] = (*vec)[j] + rng.NextLaplace(scale);
      report.payload = std::move(out);
      break;
    }
    case MechanismKind::kOue: {
      const int truth = CategoryInput(x, k, "Perturb[oue]");
      const double p = OueKeepProb();
      const double q = OueFlipProb(spec.epsilon);
      Eigen::VectorXd bits(k);
      for (int j = 0; j < k; ++j) {
        bits[j] = rng.NextBernoulli(j == truth ? p : q) ? 1.0 : 0.0;
      }
      report.payload = std::move(bits);
      break;
    }
  }
  return report;
}

Eigen::VectorXd UnbiasedTransform(const MechanismSpec& spec,
                                  const PerturbedReport& z) {
  const int k = spec.dim;
  switch (spec.kind) {
    case MechanismKind::kKrr: {
      const int* cat = std::get_if<int>(&z.payload);
      if (cat == nullptr) {
        throw TypeError("UnbiasedTransform[krr]: expected a category payload");
      }
      if (*cat < 0 || *cat >= k) {
        throw TypeError("UnbiasedTransform[krr]: category out of range");
      }
      const double p = KrrTruthProb(spec.epsilon, k);
      const double q = KrrLieProb(spec.epsilon, k);
      Eigen::VectorXd t = Eigen::VectorXd::Constant(k, -q / (p - q));
      t[*cat] = (1.0 - q) / (p - q);
      return t;
    }
    case MechanismKind::kHarmony: {
      // E[z] = x already holds with the scaled constant, so t is z itself.
      const Eigen::VectorXd& v = VectorPayload(z, "UnbiasedTransform[harmony]");
      if (v.size() != k) {
        throw TypeError("UnbiasedTransform[harmony]: dimension mismatch");
      }
      return v;
    }
    case MechanismKind::kLaplace: {
      const Eigen::VectorXd& v = VectorPayload(z, "UnbiasedTransform[laplace]");
      if (v.size() != k) {
        throw TypeError("UnbiasedTransform[laplace]: dimension mismatch");
      }
      return v;
    }
    case MechanismKind::kOue: {
      const Eigen::VectorXd& bits = VectorPayload(z, "UnbiasedTransform[oue]");
      if (bits.size() != k) {
        throw TypeError("UnbiasedTransform[oue]: dimension mismatch");
      }
      const double p = OueKeepProb();
      const double q = OueFlipProb(spec.epsilon);
      return (bits.array() - q) / (p - q);
    }
  }
  throw TypeError("UnbiasedTransform: unknown mechanism");
}

MagnitudeCodebook GetMagnitudeCodebook(const MechanismSpec& spec) {
  MagnitudeCodebook book;
  switch (spec.kind) {
    case MechanismKind::kKrr:
      book.values = {1.0};
      break;
    case MechanismKind::kHarmony:
      book.values = {HarmonyConstant(spec.epsilon, spec.dim)};
      break;
    case MechanismKind::kLaplace:
    case MechanismKind::kOue:
      book.unconstrained = true;
      book.noise_scale = spec.noise_scale;
      break;
  }
  return book;
}

}  // namespace peel
