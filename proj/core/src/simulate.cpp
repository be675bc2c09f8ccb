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

#include "peel/simulate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "peel/attacks.hpp"
#include "peel/errors.hpp"

namespace peel {
namespace {

using Clock = std::chrono::steady_clock;

std::string Fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset BuildInputData(const ExperimentConfig& config,
                       const MechanismSpec& spec, QueryKind query_kind) {
  if (!config.synthetic) {
    ColumnSelection selection;
    selection.categorical_column = config.categorical_column;
    selection.numeric_columns = config.numeric_columns;
    Dataset data = LoadDataset(config.dataset_path, selection);
    if (data.dim != spec.dim) {
      throw ConfigError("dataset dimension " + std::to_string(data.dim) +
                        " does not match mechanism k = " +
                        std::to_string(spec.dim));
    }
    if (static_cast<int64_t>(data.records.size()) < config.n) {
      throw ConfigError("dataset has " +
                        std::to_string(data.records.size()) +
                        " usable rows, run.n asks for " +
                        std::to_string(config.n));
    }
    data.records.resize(config.n);
    return data;
  }

  SyntheticSpec synth;
  synth.rows = config.n;
  synth.numeric_spread = config.numeric_spread;
  if (query_kind == QueryKind::kFrequency) {
    synth.category_probs = config.category_probs;
    if (synth.category_probs.empty()) {
      synth.category_probs.assign(spec.dim, 1.0 / spec.dim);
    }
    if (static_cast<int>(synth.category_probs.size()) != spec.dim) {
      throw ConfigError("category_probs length must equal mechanism k");
    }
  } else {
    synth.numeric_means = config.numeric_means;
    if (synth.numeric_means.empty()) {
      synth.numeric_means.assign(spec.dim, 0.0);
    } else if (synth.numeric_means.size() == 1 &&
               (config.numeric_cols == 0 || config.numeric_cols == spec.dim)) {
      synth.numeric_means.assign(spec.dim, synth.numeric_means[0]);
    }
    if (static_cast<int>(synth.numeric_means.size()) != spec.dim) {
      throw ConfigError("numeric_means length must equal mechanism k");
    }
  }
  return GenerateSynthetic(synth, MixSeed(config.master_seed, 0xda7a5e7));
}

}  // namespace

int64_t CommCost(int k) {
  if (k < 3) throw DomainError("CommCost: k must be >= 3");
  const int64_t dims = k - 1;
  int bits = 1;
  while ((int64_t{1} << bits) < dims) ++bits;
  return dims * static_cast<int64_t>(bits);
}

std::vector<CommReferenceRow> CommReferenceTable() {
  // Published per-round client costs of the comparison schemes; symbolic
  // entries keep the original parameters (d: domain size; l: commitment
  // count; n: input dimensions; g: hash output dimension).
  return {
      {"badr-fl-cat", "n float32 parameters (~1 KB each) after CAT filtering",
       ">= 466944"},
      {"shamshad-ecc-aes",
       "ECC public key (608) + ECC ciphertext (1280) + AES payload (128)",
       "2016"},
      {"parameswarath-rsa-zkp", "RSA auth token (1760) + signature (2272)",
       ">= 4032"},
      {"emprivkv-ot", "5 rounds of 1-out-of-d OT at 2048 bits per round",
       "5 * ceil(log2(d)) * 2048"},
      {"vgrr-pedersen", "l Pedersen commitments (2048-bit) plus openings",
       "2 * l * 2048 (worst case)"},
      {"secure-olh", "n commitments + g encoded slots at 2048 bits each",
       "(2n + g) * 2048"},
      {"ot-hcms",
       "4 OT ciphertexts (2048-bit) + hashed index (32) + 1-bit response",
       "8209"},
  };
}

RunReport RunExperiment(const ExperimentConfig& config) {
  const MechanismSpec spec = config.DeclaredMechanism();
  const QuerySpec query = config.Query();

  RunReport report;
  report.config_hash = config.Hash();
  report.mechanism = spec;
  report.query = query;
  report.quantized = config.quantize;
  report.comm_bits_per_report = CommCost(spec.dim);

  Dataset data = BuildInputData(config, spec, query.kind);
  report.category_labels = data.category_labels;
  for (const auto& warning : data.warnings) report.notes.push_back(warning);
  if (data.dropped_rows > 0) {
    report.notes.push_back(std::to_string(data.dropped_rows) +
                           " rows dropped for missing values");
  }
  const int64_t n = static_cast<int64_t>(data.records.size());

  const StructuralCodec codec = BuildCodec(spec.dim, config.codec_seed);
  const Quantizer quantizer = Quantizer::ForDim(spec.dim);

  // Attack plan.
  const AttackConfig& attack = config.attack;
  std::vector<int64_t> compromised;
  if (attack.kind != AttackKind::kNone) {
    compromised = CompromisedSet(attack, n);
  }
  std::vector<bool> mask(n, false);
  for (int64_t id : compromised) {
    if (id >= 0 && id < n) mask[id] = true;
  }
  report.compromised_mask = mask;

  std::vector<double> budgets;
  if (attack.kind == AttackKind::kRulePoisonBudget) {
    Rng budget_rng(MixSeed(attack.seed, 0xb0d6e7));
    budgets = RulePoisonBudgets(n, spec.epsilon * static_cast<double>(n),
                                attack.rule_lo, attack.rule_hi, compromised,
                                budget_rng);
  }
  Eigen::MatrixXd phi_poisoned;
  if (attack.kind == AttackKind::kProjectionPoison) {
    Rng matrix_rng(MixSeed(attack.seed, 0x9071f));
    phi_poisoned = ProjectionPoison(codec, attack.strength, matrix_rng);
  }

  // Detector calibration against the declared mechanism.
  CalibrationOptions copts;
  copts.alpha = config.alpha;
  copts.records = config.calibration_records;
  copts.seed = config.calibration_seed;
  copts.budget_tolerance = config.budget_tolerance;
  copts.tau_pattern_override = config.tau_pattern_override;
  copts.tau_mag_override = config.tau_mag_override;
  copts.disable_magnitude_channel = config.magnitude_channel_off;
  copts.quantized = config.quantize;
  report.policy = CalibratePolicy(codec, spec, copts);

  const AllocationPolicy allocation{query.weights, AllocationMode::kOptimal};

  std::vector<PerturbedReport> reports;
  reports.reserve(n);
  report.transmitted.reserve(n);
  std::vector<double> subspace_diag;
  subspace_diag.reserve(n);

  int64_t null_reports = 0;
  double t_perturb = 0.0, t_sparsify = 0.0, t_encode = 0.0, t_attack = 0.0;
  const double inv_sqrt_k = 1.0 / std::sqrt(static_cast<double>(spec.dim));

  for (int64_t i = 0; i < n; ++i) {
    const char* stage = "perturb";
    try {
      Rng rng = Rng::ChildStream(config.master_seed, static_cast<uint64_t>(i));

      MechanismSpec client_spec = spec;
      if (!budgets.empty()) {
        client_spec = MakeMechanismSpec(spec.kind, budgets[i], spec.dim);
      }

      auto c0 = Clock::now();
      PerturbedReport z = Perturb(client_spec, data.records[i], rng);
      z.client_id = i;
      auto c1 = Clock::now();

      stage = "sparsify";
      const Eigen::VectorXd input = SparsifierInput(spec, z);
      const auto code = Sparsify(input, spec, allocation, rng);
      auto c2 = Clock::now();

      t_perturb += std::chrono::duration<double, std::micro>(c1 - c0).count();
      t_sparsify += std::chrono::duration<double, std::micro>(c2 - c1).count();

      reports.push_back(std::move(z));
      if (!code.has_value()) {
        ++null_reports;
        continue;
      }

      stage = "encode";
      auto c3 = Clock::now();
      Eigen::VectorXd stilde = Normalize(*code).Dense();
      const Eigen::MatrixXd& projector =
          (mask[i] && attack.kind == AttackKind::kProjectionPoison)
              ? phi_poisoned
              : codec.phi;

      EncodedVector enc;
      enc.client_id = i;
      enc.magnitude_sidecar = code->magnitude;

      auto c4 = Clock::now();
      if (mask[i] && attack.kind == AttackKind::kOutputPoison &&
          attack.surface == PoisonSurface::kReport) {
        stage = "attack";
        Rng attack_rng =
            Rng::ChildStream(MixSeed(attack.seed, 0xa77ac4), i);
        stilde = PoisonNormalizedReport(stilde, attack.strength, attack_rng);
        stage = "encode";
      }
      enc.y = ProjectVector(projector, stilde);
      if (mask[i] && attack.kind == AttackKind::kOutputPoison &&
          attack.surface == PoisonSurface::kEncoded) {
        stage = "attack";
        Rng attack_rng =
            Rng::ChildStream(MixSeed(attack.seed, 0xa77ac4), i);
        enc = OutputPoison(enc, spec, attack.strength, attack_rng,
                           attack.tamper_sidecar);
        enc.client_id = i;
      }
      auto c5 = Clock::now();
      if (config.quantize) enc.y = quantizer.Apply(enc.y);

      subspace_diag.push_back(std::abs(stilde.sum()) * inv_sqrt_k);
      report.transmitted.push_back(std::move(enc));

      t_encode += std::chrono::duration<double, std::micro>(c4 - c3).count();
      t_attack += std::chrono::duration<double, std::micro>(c5 - c4).count();
    } catch (const std::exception& e) {
      throw std::runtime_error("stage " + std::string(stage) + ", client " +
                               std::to_string(i) + ": " + e.what());
    }
  }

  // Aggregator side: verify, restore, estimate.
  double t_classify = 0.0, t_restore = 0.0;
  std::vector<SparseCode> restored;
  restored.reserve(report.transmitted.size());
  report.verdicts.reserve(report.transmitted.size());
  for (size_t idx = 0; idx < report.transmitted.size(); ++idx) {
    const EncodedVector& enc = report.transmitted[idx];
    try {
      auto c0 = Clock::now();
      DetectionVerdict verdict = Classify(codec, enc, spec, report.policy);
      verdict.subspace_residual = subspace_diag[idx];
      auto c1 = Clock::now();
      restored.push_back(
          Restore(Reconstruct(codec, enc), enc.magnitude_sidecar));
      auto c2 = Clock::now();
      t_classify += std::chrono::duration<double, std::micro>(c1 - c0).count();
      t_restore += std::chrono::duration<double, std::micro>(c2 - c1).count();
      report.verdicts.push_back(std::move(verdict));
    } catch (const std::exception& e) {
      throw std::runtime_error("stage classify, client " +
                               std::to_string(enc.client_id) + ": " +
                               e.what());
    }
  }

  auto e0 = Clock::now();
  report.truth = PopulationTruth(data.records, spec, query);
  report.baseline = BaselineEstimate(reports, spec, query);
  report.peel = PeelEstimate(restored, spec, query);
  report.baseline.empirical_mse =
      (report.baseline.raw_estimate - report.truth).squaredNorm();
  report.peel.empirical_mse =
      (report.peel.raw_estimate - report.truth).squaredNorm();
  auto e1 = Clock::now();

  // Detection quality against the ground-truth compromised set.
  DetectionSummary& det = report.detection;
  det.null_reports = null_reports;
  det.compromised = static_cast<int64_t>(compromised.size());
  det.true_ratio = n > 0 ? static_cast<double>(det.compromised) / n : 0.0;
  int64_t tp = 0, fp = 0, fn = 0;
  for (const auto& verdict : report.verdicts) {
    const bool truth_positive = mask[verdict.client_id];
    if (verdict.flagged && truth_positive) ++tp;
    if (verdict.flagged && !truth_positive) ++fp;
    if (!verdict.flagged && truth_positive) ++fn;
  }
  det.flagged = tp + fp;
  det.estimated_ratio =
      report.verdicts.empty()
          ? 0.0
          : static_cast<double>(det.flagged) / report.verdicts.size();
  det.precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
  det.recall = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fn);
  const int64_t negatives = static_cast<int64_t>(report.verdicts.size()) -
                            (tp + fn);
  det.false_positive_rate =
      negatives > 0 ? static_cast<double>(fp) / negatives : 0.0;

  // Multi-trial runs also measure the estimator variance split between the
  // perturbation and the sparsification sampling.
  if (config.trials > 1) {
    const auto decomposition = RunVarianceDecomposition(
        spec, query, data.records, config.trials, allocation,
        MixSeed(config.master_seed, 0xdec0));
    report.baseline.variance_baseline = decomposition.mse_baseline;
    report.peel.variance_baseline = decomposition.mse_baseline;
    report.peel.delta_n = decomposition.delta_n_analytic;
  }

  const double n_d = static_cast<double>(std::max<int64_t>(n, 1));
  report.timings = {
      {"perturb", t_perturb / n_d},
      {"sparsify", t_sparsify / n_d},
      {"encode", t_encode / n_d},
      {"attack", t_attack / n_d},
      {"classify", t_classify / n_d},
      {"restore", t_restore / n_d},
      {"estimate",
       std::chrono::duration<double, std::micro>(e1 - e0).count() / n_d},
  };
  if (config.magnitude_channel_off) {
    report.notes.push_back("magnitude channel disabled by config");
  }
  return report;
}

void WriteRunReport(const RunReport& report, const ExperimentConfig& config,
                    const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string& hash = report.config_hash;
  const int k = report.mechanism.dim;

  {
    std::ofstream out(out_dir + "/estimates.csv");
    out << "config_hash,dimension,label,truth,baseline_raw,baseline,"
           "peel_raw,peel\n";
    for (int j = 0; j < k; ++j) {
      const std::string label =
          j < static_cast<int>(report.category_labels.size())
              ? report.category_labels[j]
              : "x" + std::to_string(j);
      out << hash << ',' << j << ',' << label << ',' << Fmt(report.truth[j])
          << ',' << Fmt(report.baseline.raw_estimate[j]) << ','
          << Fmt(report.baseline.estimate[j]) << ','
          << Fmt(report.peel.raw_estimate[j]) << ','
          << Fmt(report.peel.estimate[j]) << "\n";
    }
  }
  {
    std::ofstream out(out_dir + "/verdicts.csv");
    out << "config_hash,client_id,pattern_residual,magnitude_residual,"
           "nearest_index,nearest_sign,flagged,subspace_residual\n";
    for (const auto& v : report.verdicts) {
      out << hash << ',' << v.client_id << ',' << Fmt(v.pattern_residual)
          << ',' << Fmt(v.magnitude_residual) << ',' << v.nearest_index << ','
          << (v.nearest_sign > 0 ? "+" : "-") << ','
          << (v.flagged ? 1 : 0) << ',';
      if (v.subspace_residual.has_value()) out << Fmt(*v.subspace_residual);
      out << "\n";
    }
  }
  {
    std::ofstream out(out_dir + "/detection.csv");
    const DetectionSummary& d = report.detection;
    out << "config_hash,true_ratio,estimated_ratio,precision,recall,"
           "false_positive_rate,flagged,compromised,null_reports,quantized\n";
    out << hash << ',' << Fmt(d.true_ratio) << ',' << Fmt(d.estimated_ratio)
        << ',' << Fmt(d.precision) << ',' << Fmt(d.recall) << ','
        << Fmt(d.false_positive_rate) << ',' << d.flagged << ','
        << d.compromised << ',' << d.null_reports << ','
        << (report.quantized ? 1 : 0) << "\n";
  }
  {
    std::ofstream out(out_dir + "/comm_cost.csv");
    out << "config_hash,scheme,transmitted,bits,mode\n";
    out << hash << ",peel,(k-1) coordinates at ceil(log2(k-1)) bits each,"
        << report.comm_bits_per_report << ','
        << (report.quantized ? "quantized"
                             : "full-precision (bit figure refers to the "
                               "quantized mode)")
        << "\n";
    for (const auto& row : CommReferenceTable()) {
      out << hash << ',' << row.scheme << ',' << row.transmitted << ','
          << row.bits << ",published reference\n";
    }
  }
  {
    std::ofstream out(out_dir + "/reports.csv");
    out << "config_hash,client_id,sidecar";
    for (int j = 0; j < k - 1; ++j) out << ",y" << j;
    out << "\n";
    for (const auto& enc : report.transmitted) {
      out << hash << ',' << enc.client_id << ','
          << Fmt(enc.magnitude_sidecar);
      for (int j = 0; j < k - 1; ++j) out << ',' << Fmt(enc.y[j]);
      out << "\n";
    }
  }
  {
    std::ofstream out(out_dir + "/timing.csv");
    out << "config_hash,stage,mean_us\n";
    for (const auto& t : report.timings) {
      out << hash << ',' << t.stage << ',' << Fmt(t.mean_us) << "\n";
    }
  }
  {
    nlohmann::json j;
    j["config_hash"] = hash;
    j["config"] = config.Canonical();
    j["mechanism"] = {{"kind", MechanismKindName(report.mechanism.kind)},
                      {"epsilon", report.mechanism.epsilon},
                      {"k", report.mechanism.dim}};
    j["query"] = QueryKindName(report.query.kind);
    j["quantized"] = report.quantized;
    j["comm_bits_per_report"] = report.comm_bits_per_report;
    j["estimates"] = {
        {"truth", std::vector<double>(report.truth.begin(), report.truth.end())},
        {"baseline",
         std::vector<double>(report.baseline.estimate.begin(),
                             report.baseline.estimate.end())},
        {"peel", std::vector<double>(report.peel.estimate.begin(),
                                     report.peel.estimate.end())},
        {"baseline_mse", report.baseline.empirical_mse},
        {"peel_mse", report.peel.empirical_mse}};
    if (std::isfinite(report.peel.delta_n)) {
      j["estimates"]["variance_baseline"] = report.peel.variance_baseline;
      j["estimates"]["delta_n"] = report.peel.delta_n;
    }
    const DetectionSummary& d = report.detection;
    j["detection"] = {{"true_ratio", d.true_ratio},
                      {"estimated_ratio", d.estimated_ratio},
                      {"precision", d.precision},
                      {"recall", d.recall},
                      {"false_positive_rate", d.false_positive_rate},
                      {"flagged", d.flagged},
                      {"compromised", d.compromised},
                      {"null_reports", d.null_reports}};
    j["thresholds"] = {{"alpha", report.policy.alpha},
                       {"c_constant", report.policy.c_constant},
                       {"tau_pattern", report.policy.tau_pattern},
                       {"tau_mag", report.policy.tau_mag}};
    j["notes"] = report.notes;
    std::ofstream out(out_dir + "/summary.json");
    out << j.dump(2) << "\n";
  }
}

std::vector<EncodedVector> ReadTransmittedCsv(const std::string& path,
                                              int expected_dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("ReadTransmittedCsv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw ConfigError("ReadTransmittedCsv: empty file " + path);
  }
  std::vector<EncodedVector> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (static_cast<int>(fields.size()) != expected_dim + 2) {
      throw ConfigError(
          "ReadTransmittedCsv: row has " + std::to_string(fields.size()) +
          " fields, expected " + std::to_string(expected_dim + 2));
    }
    EncodedVector enc;
    enc.client_id = std::strtoll(fields[1].c_str(), nullptr, 10);
    enc.magnitude_sidecar = std::strtod(fields[2].c_str(), nullptr);
    enc.y.resize(expected_dim - 1);
    for (int j = 0; j < expected_dim - 1; ++j) {
      enc.y[j] = std::strtod(fields[3 + j].c_str(), nullptr);
    }
    out.push_back(std::move(enc));
  }
  return out;
}

EncodeTiming BenchEncodePath(int k, int64_t iterations, uint64_t seed) {
  if (iterations < 100) {
    throw ConfigError("BenchEncodePath: need at least 100 iterations");
  }
  const StructuralCodec codec = BuildCodec(k, seed);
  const MechanismSpec spec =
      MakeMechanismSpec(MechanismKind::kHarmony, 1.0, k);
  const double c = HarmonyConstant(spec.epsilon, k);
  Rng rng(MixSeed(seed, 0xbe4c4));
  const AllocationPolicy allocation;

  // The timed unit is the full client encode path on a 1-sparse report:
  // sparse mapping, normalization, projection.
  auto run_once = [&](int64_t i) {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
    z[static_cast<int>(i % k)] = (i & 1) ? c : -c;
    const auto code = Sparsify(z, spec, allocation, rng);
    const EncodedVector enc = Encode(codec, *code);
    return enc.y[0];
  };

  double sink = 0.0;
  for (int64_t i = 0; i < 1000; ++i) sink += run_once(i);  // warm-up

  std::vector<double> samples(iterations);
  for (int64_t i = 0; i < iterations; ++i) {
    auto t0 = Clock::now();
    sink += run_once(i);
    auto t1 = Clock::now();
    samples[i] = std::chrono::duration<double, std::micro>(t1 - t0).count();
  }
  volatile double guard = sink;
  (void)guard;

  EncodeTiming timing;
  timing.iterations = iterations;
  double total = 0.0;
  for (double s : samples) total += s;
  timing.mean_us = total / static_cast<double>(iterations);
  std::nth_element(samples.begin(),
                   samples.begin() + static_cast<size_t>(0.99 * iterations),
                   samples.end());
  timing.p99_us = samples[static_cast<size_t>(0.99 * iterations)];
  return timing;
}

}  // namespace peel
