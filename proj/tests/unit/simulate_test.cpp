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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "peel/errors.hpp"

namespace peel {
namespace {

ExperimentConfig BaseConfig(const std::string& extra) {
  return ParseConfigString(
      "[mechanism]\nkind = krr\nepsilon = 1.0\nk = 8\n"
      "[codec]\nseed = 5\n"
      "[detector]\ncalibration_records = 1500\n"
      "[query]\nkind = frequency\n"
      "[run]\nn = 400\nmaster_seed = 11\n" +
      extra);
}

TEST_CASE("benign run: no flags, estimates near truth") {
  const ExperimentConfig config = BaseConfig("");
  const RunReport report = RunExperiment(config);
  CHECK(report.detection.flagged == 0);
  CHECK(report.detection.estimated_ratio == 0.0);
  CHECK(report.detection.precision == 1.0);
  CHECK(report.detection.recall == 1.0);
  CHECK(report.verdicts.size() == 400);
  // Loose agreement at n=400.
  for (int j = 0; j < 8; ++j) {
    CHECK(std::abs(report.peel.estimate[j] - report.truth[j]) < 0.15);
  }
  // kRR closed loop: PEEL and baseline aggregate identically.
  CHECK(report.peel.raw_estimate == report.baseline.raw_estimate);
}

TEST_CASE("run experiment is deterministic") {
  const ExperimentConfig config =
      BaseConfig("[attack]\nkind = output\nratio = 0.1\nstrength = 1.0\n"
                 "seed = 3\n");
  const RunReport a = RunExperiment(config);
  const RunReport b = RunExperiment(config);
  REQUIRE(a.transmitted.size() == b.transmitted.size());
  for (size_t i = 0; i < a.transmitted.size(); ++i) {
    CHECK(a.transmitted[i].y == b.transmitted[i].y);
    CHECK(a.transmitted[i].magnitude_sidecar ==
          b.transmitted[i].magnitude_sidecar);
  }
  CHECK(a.detection.flagged == b.detection.flagged);
  CHECK(a.config_hash == b.config_hash);
}

TEST_CASE("output poisoning run identifies exactly the compromised set") {
  const ExperimentConfig config =
      BaseConfig("[attack]\nkind = output\nratio = 0.1\nstrength = 1.0\n"
                 "seed = 3\n");
  const RunReport report = RunExperiment(config);
  CHECK(report.detection.compromised == 40);
  CHECK(report.detection.flagged == 40);
  CHECK(report.detection.precision == 1.0);
  CHECK(report.detection.recall == 1.0);
  CHECK(report.detection.estimated_ratio == doctest::Approx(0.1));
}

TEST_CASE("pre-encoding output poisoning breaks subspace alignment") {
  const ExperimentConfig config =
      BaseConfig("[attack]\nkind = output\nratio = 0.1\nstrength = 0.8\n"
                 "seed = 3\nsurface = report\n");
  const RunReport report = RunExperiment(config);
  CHECK(report.detection.recall == 1.0);
  CHECK(report.detection.precision == 1.0);
  // Compromised records show a nonzero pre-encoding subspace residual.
  int nonzero = 0;
  for (const auto& v : report.verdicts) {
    if (report.compromised_mask[v.client_id]) {
      REQUIRE(v.subspace_residual.has_value());
      if (*v.subspace_residual > 1e-6) ++nonzero;
    } else {
      CHECK(*v.subspace_residual < 1e-9);
    }
  }
  CHECK(nonzero == 40);
}

TEST_CASE("harmony rule poisoning is caught through the magnitude channel") {
  const ExperimentConfig config = ParseConfigString(
      "[mechanism]\nkind = harmony\nepsilon = 1.0\nk = 4\n"
      "[codec]\nseed = 5\n"
      "[detector]\ncalibration_records = 1000\n"
      "[query]\nkind = mean\n"
      "[dataset]\nnumeric_means = 0.2\n"
      "[attack]\nkind = rule\nratio = 0.05\nseed = 21\n"
      "rule_lo = 0.25\nrule_hi = 4.0\n"
      "[run]\nn = 1000\nmaster_seed = 13\n");
  const RunReport report = RunExperiment(config);
  CHECK(report.detection.compromised == 50);
  // The audit-preserving correction shifts benign budgets by about 6%,
  // inside the 10% tolerance: no false positives.
  CHECK(report.detection.false_positive_rate == 0.0);
  // Only multipliers within the tolerance band evade the check.
  CHECK(report.detection.recall >= 0.85);
  CHECK(report.detection.estimated_ratio ==
        doctest::Approx(0.05).epsilon(0.25));
}

TEST_CASE("projection poisoning run flags every compromised client") {
  const ExperimentConfig config = ParseConfigString(
      "[mechanism]\nkind = krr\nepsilon = 1.0\nk = 16\n"
      "[codec]\nseed = 5\n"
      "[detector]\ncalibration_records = 1500\n"
      "[query]\nkind = frequency\n"
      "[attack]\nkind = projection\nratio = 0.1\nstrength = 0.1\nseed = 9\n"
      "[run]\nn = 500\nmaster_seed = 17\n");
  const RunReport report = RunExperiment(config);
  CHECK(report.detection.recall == 1.0);
  CHECK(report.detection.precision == 1.0);
  CHECK(report.detection.flagged == 50);
}

TEST_CASE("write and read back the report bundle") {
  namespace fs = std::filesystem;
  const ExperimentConfig config = BaseConfig("");
  const RunReport report = RunExperiment(config);
  const std::string dir =
      (fs::temp_directory_path() / "peel_report_test").string();
  fs::remove_all(dir);
  WriteRunReport(report, config, dir);
  for (const char* name :
       {"estimates.csv", "verdicts.csv", "detection.csv", "comm_cost.csv",
        "reports.csv", "timing.csv", "summary.json"}) {
    CHECK(fs::exists(fs::path(dir) / name));
  }
  const auto transmitted =
      ReadTransmittedCsv(dir + "/reports.csv", config.dim);
  REQUIRE(transmitted.size() == report.transmitted.size());
  for (size_t i = 0; i < transmitted.size(); ++i) {
    CHECK(transmitted[i].client_id == report.transmitted[i].client_id);
    CHECK((transmitted[i].y - report.transmitted[i].y).cwiseAbs().maxCoeff() ==
          0.0);  // %.17g round-trips doubles exactly
  }
  fs::remove_all(dir);
}

TEST_CASE("quantized mode runs and is reported honestly") {
  const ExperimentConfig config = BaseConfig("[codec]\nquantize = true\n");
  const RunReport report = RunExperiment(config);
  CHECK(report.quantized);
  const Quantizer q = Quantizer::ForDim(8);
  CHECK(report.policy.tau_pattern >= 4.0 * q.step);
}

TEST_CASE("comm cost formula and reference table") {
  CHECK(CommCost(3) == 2);    // 2 dims x 1 bit
  CHECK(CommCost(5) == 8);    // 4 dims x 2 bits
  CHECK(CommCost(9) == 24);   // 8 dims x 3 bits
  CHECK_THROWS_AS(CommCost(2), DomainError);
  int64_t previous = 0;
  for (int k = 3; k <= 1024; ++k) {
    const int64_t bits = CommCost(k);
    CHECK(bits >= previous);
    previous = bits;
  }
  CHECK(CommReferenceTable().size() == 7);
}

TEST_CASE("encode path benchmark returns sane timings") {
  const EncodeTiming timing = BenchEncodePath(16, 2000, 1);
  CHECK(timing.iterations == 2000);
  CHECK(timing.mean_us > 0.0);
  CHECK(timing.p99_us >= timing.mean_us * 0.1);
}

TEST_CASE("encode time grows with k and repeated runs are stable") {
  const EncodeTiming small = BenchEncodePath(16, 5000, 1);
  const EncodeTiming large = BenchEncodePath(252, 5000, 1);
  CHECK(small.mean_us <= large.mean_us);
  const EncodeTiming again = BenchEncodePath(16, 5000, 2);
  const double ratio = std::max(small.mean_us, again.mean_us) /
                       std::min(small.mean_us, again.mean_us);
  CHECK(ratio < 3.0);
}

TEST_CASE("config errors surface from the harness") {
  // Mechanism k mismatching the synthetic category count.
  CHECK_THROWS_AS(
      RunExperiment(ParseConfigString(
          "[mechanism]\nkind = krr\nepsilon = 1\nk = 8\n"
          "[dataset]\ncategory_probs = 0.5,0.5,0.0\n[run]\nn = 100\n")),
      ConfigError);
  CHECK_THROWS_AS(
      RunExperiment(ParseConfigString(
          "[mechanism]\nkind = krr\nepsilon = 1\nk = 8\n"
          "[dataset]\npath = /nonexistent.csv\n[run]\nn = 100\n")),
      ConfigError);
}

}  // namespace
}  // namespace peel
