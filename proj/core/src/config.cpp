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

#include "peel/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "peel/errors.hpp"

namespace peel {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double ToDouble(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end != value.c_str() + value.size()) {
    throw ConfigError("config: bad number for " + key + ": '" + value + "'");
  }
  return v;
}

int64_t ToInt(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long long v = std::strtoll(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size()) {
    throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
  }
  return static_cast<int64_t>(v);
}

uint64_t ToU64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end != value.c_str() + value.size()) {
    throw ConfigError("config: bad seed for " + key + ": '" + value + "'");
  }
  return static_cast<uint64_t>(v);
}

bool ToBool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

std::vector<double> ToDoubleList(const std::string& key,
                                 const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ',')) {
    out.push_back(ToDouble(key, Trim(field)));
  }
  return out;
}

std::vector<std::string> ToStringList(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const std::string t = Trim(field);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatDoubleList(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += FormatDouble(v[i]);
  }
  return out;
}

std::string FormatStringList(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

}  // namespace

QuerySpec ExperimentConfig::Query() const {
  QuerySpec query;
  query.kind = query_kind;
  if (!query_weights.empty()) {
    if (query_weights.size() == 1) {
      query.weights = Eigen::VectorXd::Constant(dim, query_weights[0]);
    } else {
      if (static_cast<int>(query_weights.size()) != dim) {
        throw ConfigError("config: query weights length must be 1 or k");
      }
      query.weights = Eigen::Map<const Eigen::VectorXd>(
          query_weights.data(), static_cast<int>(query_weights.size()));
    }
  }
  return query;
}

ExperimentConfig ParseConfigString(const std::string& text) {
  ExperimentConfig config;
  std::stringstream stream(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      }
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const std::string qualified = section + "." + key;

    if (qualified == "mechanism.kind") {
      config.mechanism_kind = MechanismKindFromName(value);
    } else if (qualified == "mechanism.epsilon") {
      config.epsilon = ToDouble(qualified, value);
    } else if (qualified == "mechanism.k") {
      config.dim = static_cast<int>(ToInt(qualified, value));
    } else if (qualified == "codec.seed") {
      config.codec_seed = ToU64(qualified, value);
    } else if (qualified == "codec.quantize") {
      config.quantize = ToBool(qualified, value);
    } else if (qualified == "attack.kind") {
      config.attack.kind = AttackKindFromName(value);
    } else if (qualified == "attack.ratio") {
      config.attack.ratio = ToDouble(qualified, value);
    } else if (qualified == "attack.strength") {
      config.attack.strength = ToDouble(qualified, value);
    } else if (qualified == "attack.seed") {
      config.attack.seed = ToU64(qualified, value);
    } else if (qualified == "attack.rule_lo") {
      config.attack.rule_lo = ToDouble(qualified, value);
    } else if (qualified == "attack.rule_hi") {
      config.attack.rule_hi = ToDouble(qualified, value);
    } else if (qualified == "attack.tamper_sidecar") {
      config.attack.tamper_sidecar = ToBool(qualified, value);
    } else if (qualified == "attack.surface") {
      if (value == "encoded") {
        config.attack.surface = PoisonSurface::kEncoded;
      } else if (value == "report") {
        config.attack.surface = PoisonSurface::kReport;
      } else {
        throw ConfigError("config: attack.surface must be encoded|report");
      }
    } else if (qualified == "attack.target_set") {
      std::set<int64_t> ids;
      for (const auto& field : ToStringList(value)) {
        ids.insert(ToInt(qualified, field));
      }
      config.attack.target_set = std::move(ids);
    } else if (qualified == "detector.alpha") {
      config.alpha = ToDouble(qualified, value);
    } else if (qualified == "detector.calibration_records") {
      config.calibration_records = static_cast<int>(ToInt(qualified, value));
    } else if (qualified == "detector.calibration_seed") {
      config.calibration_seed = ToU64(qualified, value);
    } else if (qualified == "detector.budget_tolerance") {
      config.budget_tolerance = ToDouble(qualified, value);
    } else if (qualified == "detector.tau_pattern") {
      if (value != "auto") {
        config.tau_pattern_override = ToDouble(qualified, value);
      }
    } else if (qualified == "detector.tau_mag") {
      if (value == "off") {
        config.magnitude_channel_off = true;
      } else if (value != "auto") {
        config.tau_mag_override = ToDouble(qualified, value);
      }
    } else if (qualified == "query.kind") {
      config.query_kind = QueryKindFromName(value);
    } else if (qualified == "query.weights") {
      config.query_weights = ToDoubleList(qualified, value);
    } else if (qualified == "dataset.synthetic") {
      config.synthetic = ToBool(qualified, value);
    } else if (qualified == "dataset.path") {
      config.dataset_path = value;
      config.synthetic = false;
    } else if (qualified == "dataset.categorical_column") {
      config.categorical_column = value;
    } else if (qualified == "dataset.numeric_columns") {
      config.numeric_columns = ToStringList(value);
    } else if (qualified == "dataset.category_probs") {
      config.category_probs = ToDoubleList(qualified, value);
    } else if (qualified == "dataset.numeric_means") {
      config.numeric_means = ToDoubleList(qualified, value);
    } else if (qualified == "dataset.numeric_cols") {
      config.numeric_cols = static_cast<int>(ToInt(qualified, value));
    } else if (qualified == "dataset.numeric_spread") {
      config.numeric_spread = ToDouble(qualified, value);
    } else if (qualified == "run.n") {
      config.n = ToInt(qualified, value);
    } else if (qualified == "run.trials") {
      config.trials = static_cast<int>(ToInt(qualified, value));
    } else if (qualified == "run.master_seed") {
      config.master_seed = ToU64(qualified, value);
    } else if (qualified == "run.out_dir") {
      config.out_dir = value;
    } else {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + qualified + "'");
    }
  }

  // Basic validation; mechanism construction checks epsilon/k again.
  if (config.n < 10) throw ConfigError("config: run.n must be >= 10");
  if (config.trials < 1) throw ConfigError("config: run.trials must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("config: detector.alpha must lie in (0, 1)");
  }
  (void)config.DeclaredMechanism();
  return config;
}

ExperimentConfig ParseConfigFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfigString(buffer.str());
}

std::string ExperimentConfig::Canonical() const {
  std::string out;
  auto add = [&out](const std::string& key, const std::string& value) {
    out += key + "=" + value + "\n";
  };
  add("attack.kind", AttackKindName(attack.kind));
  add("attack.ratio", FormatDouble(attack.ratio));
  add("attack.rule_hi", FormatDouble(attack.rule_hi));
  add("attack.rule_lo", FormatDouble(attack.rule_lo));
  add("attack.seed", std::to_string(attack.seed));
  add("attack.strength", FormatDouble(attack.strength));
  add("attack.surface",
      attack.surface == PoisonSurface::kEncoded ? "encoded" : "report");
  add("attack.tamper_sidecar", attack.tamper_sidecar ? "true" : "false");
  if (attack.target_set.has_value()) {
    std::string ids;
    for (int64_t id : *attack.target_set) {
      if (!ids.empty()) ids += ",";
      ids += std::to_string(id);
    }
    add("attack.target_set", ids);
  }
  add("codec.quantize", quantize ? "true" : "false");
  add("codec.seed", std::to_string(codec_seed));
  add("dataset.categorical_column", categorical_column);
  add("dataset.category_probs", FormatDoubleList(category_probs));
  add("dataset.numeric_cols", std::to_string(numeric_cols));
  add("dataset.numeric_columns", FormatStringList(numeric_columns));
  add("dataset.numeric_means", FormatDoubleList(numeric_means));
  add("dataset.numeric_spread", FormatDouble(numeric_spread));
  add("dataset.path", dataset_path);
  add("dataset.synthetic", synthetic ? "true" : "false");
  add("detector.alpha", FormatDouble(alpha));
  add("detector.budget_tolerance", FormatDouble(budget_tolerance));
  add("detector.calibration_records", std::to_string(calibration_records));
  add("detector.calibration_seed", std::to_string(calibration_seed));
  add("detector.tau_mag", magnitude_channel_off
                              ? "off"
                              : (std::isnan(tau_mag_override)
                                     ? "auto"
                                     : FormatDouble(tau_mag_override)));
  add("detector.tau_pattern", std::isnan(tau_pattern_override)
                                  ? "auto"
                                  : FormatDouble(tau_pattern_override));
  add("mechanism.epsilon", FormatDouble(epsilon));
  add("mechanism.k", std::to_string(dim));
  add("mechanism.kind", MechanismKindName(mechanism_kind));
  add("query.kind", QueryKindName(query_kind));
  add("query.weights", FormatDoubleList(query_weights));
  add("run.master_seed", std::to_string(master_seed));
  add("run.n", std::to_string(n));
  add("run.trials", std::to_string(trials));
  return out;
}

std::string HashHex(const std::string& text) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string ExperimentConfig::Hash() const { return HashHex(Canonical()); }

}  // namespace peel
