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

#include "peel/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "peel/errors.hpp"

namespace peel {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool ParseDouble(const std::string& s, double* out) {
  const std::string t = Trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

}  // namespace

Dataset LoadDataset(const std::string& path,
                    const ColumnSelection& selection) {
  std::ifstream in(path);
  if (!in) throw ConfigError("LoadDataset: cannot open " + path);

  const bool categorical = !selection.categorical_column.empty();
  if (categorical && !selection.numeric_columns.empty()) {
    throw ConfigError(
        "LoadDataset: select either a categorical column or numeric columns, "
        "not both");
  }
  if (!categorical && selection.numeric_columns.empty()) {
    throw ConfigError("LoadDataset: empty column selection");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("LoadDataset: " + path + " is empty");
  }
  const std::vector<std::string> header = SplitCsvLine(line);
  std::map<std::string, int> column_index;
  for (size_t i = 0; i < header.size(); ++i) {
    column_index[Trim(header[i])] = static_cast<int>(i);
  }
  auto require_column = [&](const std::string& name) {
    auto it = column_index.find(name);
    if (it == column_index.end()) {
      throw ConfigError("LoadDataset: column '" + name + "' not in " + path);
    }
    return it->second;
  };

  Dataset out;
  if (categorical) {
    const int col = require_column(selection.categorical_column);
    std::map<std::string, int> codes;
    std::vector<int> raw;
    while (std::getline(in, line)) {
      if (Trim(line).empty()) continue;
      const auto fields = SplitCsvLine(line);
      if (col >= static_cast<int>(fields.size()) ||
          Trim(fields[col]).empty()) {
        ++out.dropped_rows;
        continue;
      }
      const std::string value = Trim(fields[col]);
      auto [it, inserted] = codes.emplace(value, -1);
      if (inserted) {
        it->second = static_cast<int>(out.category_labels.size());
        out.category_labels.push_back(value);
      }
      raw.push_back(it->second);
    }
    out.dim = static_cast<int>(out.category_labels.size());
    if (out.dim < 3) {
      throw ConfigError(
          "LoadDataset: categorical column '" + selection.categorical_column +
          "' has " + std::to_string(out.dim) +
          " distinct values; the pipeline needs k >= 3 (merge or re-encode "
          "the column)");
    }
    out.records.reserve(raw.size());
    for (int code : raw) out.records.emplace_back(code);
    return out;
  }

  std::vector<int> cols;
  cols.reserve(selection.numeric_columns.size());
  for (const auto& name : selection.numeric_columns) {
    cols.push_back(require_column(name));
  }
  const int m = static_cast<int>(cols.size());
  std::vector<Eigen::VectorXd> rows;
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(
      m, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(
      m, -std::numeric_limits<double>::infinity());
  while (std::getline(in, line)) {
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsvLine(line);
    Eigen::VectorXd row(m);
    bool ok = true;
    for (int j = 0; j < m; ++j) {
      if (cols[j] >= static_cast<int>(fields.size()) ||
          !ParseDouble(fields[cols[j]], &row[j])) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++out.dropped_rows;
      continue;
    }
    lo = lo.cwiseMin(row);
    hi = hi.cwiseMax(row);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw ConfigError("LoadDataset: no usable rows in " + path);
  }
  for (int j = 0; j < m; ++j) {
    if (hi[j] == lo[j]) {
      out.warnings.push_back("column '" + selection.numeric_columns[j] +
                             "' is constant; mapped to 0");
    }
  }
  out.dim = m;
  out.records.reserve(rows.size());
  for (auto& row : rows) {
    Eigen::VectorXd scaled(m);
    for (int j = 0; j < m; ++j) {
      scaled[j] = hi[j] == lo[j]
                      ? 0.0
                      : -1.0 + 2.0 * (row[j] - lo[j]) / (hi[j] - lo[j]);
    }
    out.records.emplace_back(std::move(scaled));
  }
  return out;
}

Dataset GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed) {
  if (spec.rows <= 0) {
    throw ConfigError("GenerateSynthetic: rows must be positive");
  }
  const bool categorical = !spec.category_probs.empty();
  if (categorical && !spec.numeric_means.empty()) {
    throw ConfigError(
        "GenerateSynthetic: give category_probs or numeric_means, not both");
  }
  Dataset out;
  Rng rng = Rng::ChildStream(seed, 0xda7a);
  if (categorical) {
    const int k = static_cast<int>(spec.category_probs.size());
    if (k < 3) throw ConfigError("GenerateSynthetic: need >= 3 categories");
    double total = 0.0;
    for (double p : spec.category_probs) {
      if (p < 0.0) throw ConfigError("GenerateSynthetic: negative probability");
      total += p;
    }
    if (!(total > 0.0)) {
      throw ConfigError("GenerateSynthetic: probabilities sum to zero");
    }
    out.dim = k;
    for (int c = 0; c < k; ++c) {
      out.category_labels.push_back("c" + std::to_string(c));
    }
    out.records.reserve(spec.rows);
    for (int64_t i = 0; i < spec.rows; ++i) {
      const double u = rng.NextUnit() * total;
      double cum = 0.0;
      int drawn = k - 1;
      for (int c = 0; c < k; ++c) {
        cum += spec.category_probs[c];
        if (u < cum) {
          drawn = c;
          break;
        }
      }
      out.records.emplace_back(drawn);
    }
    return out;
  }
  if (spec.numeric_means.empty()) {
    throw ConfigError("GenerateSynthetic: empty column specification");
  }
  const int m = static_cast<int>(spec.numeric_means.size());
  if (m < 3) throw ConfigError("GenerateSynthetic: need >= 3 numeric columns");
  out.dim = m;
  out.records.reserve(spec.rows);
  for (int64_t i = 0; i < spec.rows; ++i) {
    Eigen::VectorXd row(m);
    for (int j = 0; j < m; ++j) {
      const double mean = spec.numeric_means[j];
      if (mean < -1.0 || mean > 1.0) {
        throw ConfigError("GenerateSynthetic: mean outside [-1, 1]");
      }
      double v = mean + rng.NextUniform(-spec.numeric_spread,
                                        spec.numeric_spread);
      row[j] = std::clamp(v, -1.0, 1.0);
    }
    out.records.emplace_back(std::move(row));
  }
  return out;
}

void WriteSyntheticCsv(const SyntheticSpec& spec, uint64_t seed,
                       const std::string& path) {
  const Dataset data = GenerateSynthetic(spec, seed);
  std::ofstream outfile(path);
  if (!outfile) throw ConfigError("WriteSyntheticCsv: cannot write " + path);
  const bool categorical = !spec.category_probs.empty();
  if (categorical) {
    outfile << "cat\n";
    for (const auto& record : data.records) {
      outfile << std::get<int>(record) << "\n";
    }
  } else {
    for (int j = 0; j < data.dim; ++j) {
      outfile << (j ? ",x" : "x") << j;
    }
    outfile << "\n";
    char buf[64];
    for (const auto& record : data.records) {
      const auto& row = std::get<Eigen::VectorXd>(record);
      for (int j = 0; j < data.dim; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
        outfile << (j ? "," : "") << buf;
      }
      outfile << "\n";
    }
  }
}

}  // namespace peel
