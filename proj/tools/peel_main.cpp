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

// Command-line front end: simulate | detect | comm-cost | bench | gen-data.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "peel/attacks.hpp"
#include "peel/config.hpp"
#include "peel/dataset.hpp"
#include "peel/errors.hpp"
#include "peel/simulate.hpp"

namespace {

int RunSimulate(const std::string& config_path, const std::string& out_dir) {
  const peel::ExperimentConfig config = peel::ParseConfigFile(config_path);
  const std::string dir = out_dir.empty() ? config.out_dir : out_dir;
  const peel::RunReport report = peel::RunExperiment(config);
  peel::WriteRunReport(report, config, dir);
  std::printf("config %s  n=%lld  mechanism=%s  attack=%s\n",
              report.config_hash.c_str(),
              static_cast<long long>(config.n),
              peel::MechanismKindName(config.mechanism_kind).c_str(),
              peel::AttackKindName(config.attack.kind).c_str());
  std::printf("estimated ratio %.4f (true %.4f)  precision %.4f  recall %.4f\n",
              report.detection.estimated_ratio, report.detection.true_ratio,
              report.detection.precision, report.detection.recall);
  std::printf("reports written to %s\n", dir.c_str());
  return 0;
}

int RunDetect(const std::string& config_path, const std::string& reports_path,
              const std::string& out_path) {
  const peel::ExperimentConfig config = peel::ParseConfigFile(config_path);
  const peel::MechanismSpec spec = config.DeclaredMechanism();
  const peel::StructuralCodec codec =
      peel::BuildCodec(spec.dim, config.codec_seed);

  peel::CalibrationOptions copts;
  copts.alpha = config.alpha;
  copts.records = config.calibration_records;
  copts.seed = config.calibration_seed;
  copts.budget_tolerance = config.budget_tolerance;
  copts.tau_pattern_override = config.tau_pattern_override;
  copts.tau_mag_override = config.tau_mag_override;
  copts.disable_magnitude_channel = config.magnitude_channel_off;
  copts.quantized = config.quantize;
  const peel::ThresholdPolicy policy =
      peel::CalibratePolicy(codec, spec, copts);

  const auto transmitted =
      peel::ReadTransmittedCsv(reports_path, spec.dim);
  std::vector<peel::DetectionVerdict> verdicts;
  verdicts.reserve(transmitted.size());
  for (const auto& enc : transmitted) {
    verdicts.push_back(peel::Classify(codec, enc, spec, policy));
  }

  std::ofstream out(out_path);
  if (!out) throw peel::ConfigError("cannot write " + out_path);
  out << "config_hash,client_id,pattern_residual,magnitude_residual,"
         "nearest_index,nearest_sign,flagged,subspace_residual\n";
  char buf[64];
  const std::string hash = config.Hash();
  for (const auto& v : verdicts) {
    out << hash << ',' << v.client_id << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", v.pattern_residual);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", v.magnitude_residual);
    out << buf << ',' << v.nearest_index << ','
        << (v.nearest_sign > 0 ? "+" : "-") << ',' << (v.flagged ? 1 : 0)
        << ",\n";
  }
  std::printf("classified %zu reports, estimated ratio %.4f, wrote %s\n",
              verdicts.size(), peel::EstimateRatio(verdicts),
              out_path.c_str());
  return 0;
}

int RunCommCost(int k) {
  std::printf("scheme,transmitted,bits\n");
  std::printf("peel,(k-1) coordinates at ceil(log2(k-1)) bits each (k=%d),%lld\n",
              k, static_cast<long long>(peel::CommCost(k)));
  for (const auto& row : peel::CommReferenceTable()) {
    std::printf("%s,%s,%s\n", row.scheme.c_str(), row.transmitted.c_str(),
                row.bits.c_str());
  }
  return 0;
}

int RunBench(int k, long long iterations, unsigned long long seed) {
  const peel::EncodeTiming timing =
      peel::BenchEncodePath(k, iterations, seed);
  std::printf("k=%d iterations=%lld mean_us=%.3f p99_us=%.3f\n", k,
              static_cast<long long>(timing.iterations), timing.mean_us,
              timing.p99_us);
  return 0;
}

int RunGenData(const std::string& config_path, const std::string& out_path) {
  const peel::ExperimentConfig config = peel::ParseConfigFile(config_path);
  peel::SyntheticSpec synth;
  synth.rows = config.n;
  synth.numeric_spread = config.numeric_spread;
  if (config.query_kind == peel::QueryKind::kFrequency) {
    synth.category_probs = config.category_probs;
    if (synth.category_probs.empty()) {
      synth.category_probs.assign(config.dim, 1.0 / config.dim);
    }
  } else {
    synth.numeric_means = config.numeric_means;
    if (synth.numeric_means.empty()) {
      synth.numeric_means.assign(config.dim, 0.0);
    } else if (synth.numeric_means.size() == 1) {
      synth.numeric_means.assign(config.dim, synth.numeric_means[0]);
    }
  }
  peel::WriteSyntheticCsv(synth, peel::MixSeed(config.master_seed, 0xda7a5e7),
                          out_path);
  std::printf("wrote %lld synthetic rows to %s\n",
              static_cast<long long>(config.n), out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural poisoning-exposure pipeline for local "
               "differential privacy"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "run the full pipeline");
  simulate->add_option("--config", config_path, "experiment config file")
      ->required();
  simulate->add_option("--out", out_dir, "output directory (overrides config)");

  std::string reports_path;
  std::string verdicts_path = "verdicts.csv";
  auto* detect =
      app.add_subcommand("detect", "classify a saved reports.csv file");
  detect->add_option("--config", config_path, "experiment config file")
      ->required();
  detect->add_option("--reports", reports_path, "reports.csv to classify")
      ->required();
  detect->add_option("--out", verdicts_path, "verdict CSV to write");

  int k = 252;
  auto* comm = app.add_subcommand("comm-cost", "per-report transmission bits");
  comm->add_option("--k", k, "encoding dimension (k >= 3)");

  long long iterations = 100000;
  unsigned long long bench_seed = 42;
  int bench_k = 252;
  auto* bench = app.add_subcommand("bench", "time the client encode path");
  bench->add_option("--k", bench_k, "encoding dimension");
  bench->add_option("--iters", iterations, "timed iterations");
  bench->add_option("--seed", bench_seed, "codec seed");

  std::string data_out = "synthetic.csv";
  auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset CSV");
  gen->add_option("--config", config_path, "experiment config file")
      ->required();
  gen->add_option("--out", data_out, "CSV path to write");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return RunSimulate(config_path, out_dir);
    if (detect->parsed())
      return RunDetect(config_path, reports_path, verdicts_path);
    if (comm->parsed()) return RunCommCost(k);
    if (bench->parsed()) return RunBench(bench_k, iterations, bench_seed);
    if (gen->parsed()) return RunGenData(config_path, data_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
