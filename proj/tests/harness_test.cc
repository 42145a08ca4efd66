// Copyright 2026 The semidp Authors
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

#include "semidp/harness.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "semidp/util.h"

namespace semidp {
namespace {

void SilenceWarnings() {
  SetWarningHandler([](const std::string&) {});
}

std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string TempPath(const std::string& name) {
  return testing::TempDir() + "/" + name;
}

ExperimentSpec SmallSweep() {
  ExperimentSpec spec;
  spec.command = Command::kOlvqSweep;
  spec.n_values = {64, 128};
  spec.k_values = {4};
  spec.d_values = {8};
  spec.rho_values = {0.5};
  spec.seeds = {1, 2};
  spec.num_queries = 8;
  return spec;
}

TEST(ExperimentSpecTest, ValidationListsBadFieldsByName) {
  ExperimentSpec spec = SmallSweep();
  spec.n_values = {};
  spec.seeds = {3, 3};
  spec.beta = 0.9;
  const std::vector<std::string> bad = spec.Validate();
  EXPECT_NE(std::find(bad.begin(), bad.end(), "n"), bad.end());
  EXPECT_NE(std::find(bad.begin(), bad.end(), "seeds (must be distinct)"),
            bad.end());
  EXPECT_NE(std::find(bad.begin(), bad.end(), "beta"), bad.end());
  EXPECT_EQ(::semidp::Run(spec), 1);
}

TEST(ExperimentSpecTest, RhoAndEpsilonAreExclusive) {
  ExperimentSpec spec = SmallSweep();
  spec.epsilon_values = {1.0};
  const std::vector<std::string> bad = spec.Validate();
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0], "rho/eps (mutually exclusive)");
}

TEST(ExperimentSpecTest, HashIsStableAndSpecSensitive) {
  const ExperimentSpec a = SmallSweep();
  ExperimentSpec b = SmallSweep();
  EXPECT_EQ(a.ConfigHash(), b.ConfigHash());
  b.seeds = {1, 3};
  EXPECT_NE(a.ConfigHash(), b.ConfigHash());
}

TEST(RunTest, OlvqSweepIsByteDeterministic) {
  SilenceWarnings();
  ExperimentSpec spec = SmallSweep();
  spec.output_path = TempPath("sweep_a.csv");
  ASSERT_EQ(::semidp::Run(spec), 0);
  const std::string first = ReadAll(spec.output_path);
  spec.output_path = TempPath("sweep_b.csv");
  ASSERT_EQ(::semidp::Run(spec), 0);
  const std::string second = ReadAll(spec.output_path);
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, second);

  // One row per (grid point, seed) plus the comment and header lines.
  std::int64_t lines = 0;
  for (char c : first) lines += c == '\n' ? 1 : 0;
  EXPECT_EQ(lines, 2 + 2 * 2);
  EXPECT_NE(first.find("# config_hash=" + spec.ConfigHash()), std::string::npos);
  EXPECT_EQ(first.find("NONPRIVATE_DEBUG"), std::string::npos);
}

TEST(RunTest, DebugModeMarksHeaderAndWritesTranscripts) {
  SilenceWarnings();
  ExperimentSpec spec = SmallSweep();
  spec.n_values = {64};
  spec.seeds = {1};
  spec.debug_nonprivate = true;
  spec.transcript_dir = testing::TempDir();
  spec.output_path = TempPath("sweep_debug.csv");
  ASSERT_EQ(::semidp::Run(spec), 0);
  EXPECT_NE(ReadAll(spec.output_path).find("NONPRIVATE_DEBUG=1"),
            std::string::npos);
  const std::string transcript = ReadAll(testing::TempDir() + "/transcript_0.jsonl");
  EXPECT_NE(transcript.find("\"error_vs_truth\":"), std::string::npos);
  EXPECT_NE(transcript.find("\"status\":\"OK\""), std::string::npos);
}

TEST(RunTest, TranscriptOmitsErrorsWithoutDebugFlag) {
  SilenceWarnings();
  ExperimentSpec spec = SmallSweep();
  spec.n_values = {64};
  spec.seeds = {4};
  spec.transcript_dir = testing::TempDir();
  spec.output_path = TempPath("sweep_nodebug.csv");
  ASSERT_EQ(::semidp::Run(spec), 0);
  const std::string transcript = ReadAll(testing::TempDir() + "/transcript_0.jsonl");
  EXPECT_FALSE(transcript.empty());
  EXPECT_EQ(transcript.find("error_vs_truth"), std::string::npos);
}

TEST(RunTest, AuditLedgerSumsToBudget) {
  SilenceWarnings();
  ExperimentSpec spec;
  spec.command = Command::kAudit;
  spec.n_values = {64};
  spec.k_values = {4};
  spec.rho_values = {0.75};
  spec.seeds = {1};
  spec.num_queries = 4;
  spec.output_path = TempPath("audit.csv");
  ASSERT_EQ(::semidp::Run(spec), 0);

  std::ifstream in(spec.output_path);
  std::string line;
  std::getline(in, line);  // comment
  std::getline(in, line);
  EXPECT_EQ(line, "label,rho,cumulative_rho");
  double cumulative = 0.0;
  while (std::getline(in, line)) {
    const auto last_comma = line.rfind(',');
    cumulative = std::stod(line.substr(last_comma + 1));
  }
  EXPECT_NEAR(cumulative, 0.75, 1e-12);
}

TEST(RunTest, VerifyLemma1Passes) {
  SilenceWarnings();
  ExperimentSpec spec;
  spec.command = Command::kVerifyLemma1;
  spec.seeds = {1};
  spec.trials = 20000;
  spec.sigma_z_values = {0.2};
  spec.support_size = 8;
  spec.lemma1_dim = 4;
  spec.output_path = TempPath("lemma1.csv");
  EXPECT_EQ(::semidp::Run(spec), 0);
  const std::string csv = ReadAll(spec.output_path);
  EXPECT_NE(csv.find(",1\n"), std::string::npos);  // pass column
}

TEST(RunTest, MwuPropsPasses) {
  SilenceWarnings();
  ExperimentSpec spec;
  spec.command = Command::kMwuProps;
  spec.seeds = {11};
  spec.property_instances = 40;
  spec.output_path = TempPath("props.csv");
  EXPECT_EQ(::semidp::Run(spec), 0);
  const std::string csv = ReadAll(spec.output_path);
  EXPECT_NE(csv.find("potential_drop"), std::string::npos);
  EXPECT_NE(csv.find("update_budget"), std::string::npos);
}

TEST(RunTest, ErmConvexSweepWritesSchema) {
  SilenceWarnings();
  ExperimentSpec spec;
  spec.command = Command::kErmConvex;
  spec.n_values = {64};
  spec.k_values = {2};
  spec.rho_values = {1.0};
  spec.seeds = {1};
  spec.erm_steps = 50;
  spec.output_path = TempPath("erm.csv");
  ASSERT_EQ(::semidp::Run(spec), 0);
  const std::string csv = ReadAll(spec.output_path);
  EXPECT_NE(csv.find("config_hash,command,problem_id,n,k,d,rho,epsilon,delta,"
                     "seed,q,eta,excess_risk,theoretical_alpha,"
                     "vacuous_guarantee,failed"),
            std::string::npos);
  EXPECT_NE(csv.find("erm-convex,0,64,2,128,1,"), std::string::npos);
}

TEST(MakeSweepQueryTest, GradientFamilyUsesFlattenedDimension) {
  const auto q = MakeSweepQuery(QueryFamily::kGradient, 0, 16, 4, 32, 1);
  EXPECT_EQ(q->dim(), 64);
}

}  // namespace
}  // namespace semidp
