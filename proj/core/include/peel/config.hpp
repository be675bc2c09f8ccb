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

#ifndef PEEL_CONFIG_H_
#define PEEL_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

#include "peel/attacks.hpp"
#include "peel/detector.hpp"
#include "peel/estimators.hpp"
#include "peel/mechanism.hpp"

namespace peel {

// Fully parsed experiment description. See the README for the file format;
// every key has a default except mechanism kind/epsilon/k.
struct ExperimentConfig {
  // [mechanism]
  MechanismKind mechanism_kind = MechanismKind::kKrr;
  double epsilon = 1.0;
  int dim = 3;

  // [codec]
  uint64_t codec_seed = 42;
  bool quantize = false;

  // [attack]
  AttackConfig attack;

  // [detector]
  double alpha = 1e-3;
  int calibration_records = 10000;
  uint64_t calibration_seed = 0x5ca1ab1e;
  double budget_tolerance = 0.1;
  double tau_pattern_override = std::numeric_limits<double>::quiet_NaN();
  double tau_mag_override = std::numeric_limits<double>::quiet_NaN();
  bool magnitude_channel_off = false;

  // [query]
  QueryKind query_kind = QueryKind::kFrequency;
  std::vector<double> query_weights;  // empty = all-ones

  // [dataset]
  bool synthetic = true;
  std::string dataset_path;
  std::string categorical_column;
  std::vector<std::string> numeric_columns;
  std::vector<double> category_probs;
  std::vector<double> numeric_means;
  int numeric_cols = 0;  // broadcast count when numeric_means has one entry
  double numeric_spread = 0.5;

  // [run]
  int64_t n = 1000;
  int trials = 1;
  uint64_t master_seed = 1;
  std::string out_dir = "out";

  MechanismSpec DeclaredMechanism() const {
    return MakeMechanismSpec(mechanism_kind, epsilon, dim);
  }
  QuerySpec Query() const;

  // Canonical "section.key=value" rendering of every setting, used for the
  // config hash carried on every report row.
  std::string Canonical() const;
  std::string Hash() const;
};

ExperimentConfig ParseConfigString(const std::string& text);
ExperimentConfig ParseConfigFile(const std::string& path);

// FNV-1a 64-bit over a string, rendered as 16 hex digits.
std::string HashHex(const std::string& text);

}  // namespace peel

#endif  // PEEL_CONFIG_H_
