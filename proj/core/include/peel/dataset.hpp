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

#ifndef PEEL_DATASET_H_
#define PEEL_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "peel/mechanism.hpp"
#include "peel/rng.hpp"

namespace peel {

// Column selection for ingestion. Exactly one of the two selections is used
// per run: the categorical column for frequency queries, the numeric
// columns for mean queries.
struct ColumnSelection {
  std::string categorical_column;       // empty if unused
  std::vector<std::string> numeric_columns;
};

// Result of ingestion: records in the form the mechanisms consume, plus
// bookkeeping about what was mapped and dropped.
struct Dataset {
  std::vector<RawRecord> records;
  int dim = 0;                          // category count or attribute count
  std::vector<std::string> category_labels;  // categorical runs only
  int64_t dropped_rows = 0;             // rows removed for missing values
  std::vector<std::string> warnings;
};

// Loads a comma-separated file with a header row. Numeric columns are
// min-max scaled to [-1, 1] using dataset-wide extremes (a constant column
// maps to 0 with a warning); categorical values are mapped to dense codes
// in first-appearance order. Rows missing any selected value are dropped
// and counted.
Dataset LoadDataset(const std::string& path, const ColumnSelection& selection);

// Parameters of the synthetic generator used by simulations and tests.
struct SyntheticSpec {
  int64_t rows = 0;
  // Categorical part: empty probs means no categorical column.
  std::vector<double> category_probs;
  // Numeric part: one mean per column, values drawn uniformly within
  // +/- spread of the mean and clamped to [-1, 1].
  std::vector<double> numeric_means;
  double numeric_spread = 0.5;
};

// Draws a synthetic dataset. Categorical records when category_probs is
// set, otherwise numeric records over numeric_means.
Dataset GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed);

// Writes a synthetic dataset as CSV (header "cat" and/or "x0..x{m-1}") so
// the same data can flow back through LoadDataset.
void WriteSyntheticCsv(const SyntheticSpec& spec, uint64_t seed,
                       const std::string& path);

}  // namespace peel

#endif  // PEEL_DATASET_H_
