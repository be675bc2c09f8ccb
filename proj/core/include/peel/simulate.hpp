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

#ifndef PEEL_SIMULATE_H_
#define PEEL_SIMULATE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "peel/config.hpp"
#include "peel/dataset.hpp"
#include "peel/detector.hpp"
#include "peel/estimators.hpp"

namespace peel {

// Detection quality against the known compromised set. With zero positives
// (or zero flags) the undefined ratios default to 1.
struct DetectionSummary {
  double true_ratio = 0.0;
  double estimated_ratio = 0.0;
  double precision = 1.0;
  double recall = 1.0;
  double false_positive_rate = 0.0;
  int64_t flagged = 0;
  int64_t compromised = 0;
  int64_t null_reports = 0;
};

struct StageTiming {
  std::string stage;
  double mean_us = 0.0;
};

// Everything one experiment produces, before serialization.
struct RunReport {
  std::string config_hash;
  MechanismSpec mechanism;
  QuerySpec query;
  bool quantized = false;
  int64_t comm_bits_per_report = 0;

  Eigen::VectorXd truth;
  EstimateReport baseline;
  EstimateReport peel;
  std::vector<std::string> category_labels;

  DetectionSummary detection;
  ThresholdPolicy policy;
  std::vector<DetectionVerdict> verdicts;
  std::vector<EncodedVector> transmitted;
  std::vector<bool> compromised_mask;
  std::vector<StageTiming> timings;
  std::vector<std::string> notes;
};

// Runs the full pipeline for every client: perturb, sparsify, normalize,
// encode, attack (for compromised clients), transmit, reconstruct,
// classify, restore, estimate.
RunReport RunExperiment(const ExperimentConfig& config);

// Serializes a report into `out_dir`: estimates.csv, verdicts.csv,
// detection.csv, comm_cost.csv, reports.csv, summary.json, and timing.csv
// (timing is the only nondeterministic file).
void WriteRunReport(const RunReport& report, const ExperimentConfig& config,
                    const std::string& out_dir);

// Reads back a reports.csv written by WriteRunReport.
std::vector<EncodedVector> ReadTransmittedCsv(const std::string& path,
                                              int expected_dim);

// Bits per transmitted report under the quantized accounting:
// (k-1) * ceil(log2(k-1)).
int64_t CommCost(int k);

// A static reference row of the communication comparison table.
struct CommReferenceRow {
  std::string scheme;
  std::string transmitted;
  std::string bits;  // published constant or symbolic expression
};
std::vector<CommReferenceRow> CommReferenceTable();

// Mean/p99 wall time of the client encode path (sparsify + normalize +
// project) over `iterations` runs after a warm-up.
struct EncodeTiming {
  double mean_us = 0.0;
  double p99_us = 0.0;
  int64_t iterations = 0;
};
EncodeTiming BenchEncodePath(int k, int64_t iterations, uint64_t seed);

}  // namespace peel

#endif  // PEEL_SIMULATE_H_
