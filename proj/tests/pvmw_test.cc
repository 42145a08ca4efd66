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

#include "semidp/pvmw.h"

#include <cmath>

#include <gtest/gtest.h>

#include "semidp/dataset_io.h"
#include "semidp/harness.h"
#include "semidp/mwu.h"
#include "semidp/util.h"

namespace semidp {
namespace {

void SilenceWarnings() {
  SetWarningHandler([](const std::string&) {});
}

TEST(PvmwConfigTest, DerivedIdentitiesFromPinnedEta) {
  SilenceWarnings();
  const PvmwConfig config =
      PvmwConfig::FromEta(/*rho=*/1.0, /*beta=*/0.1, /*max_queries=*/64,
                          /*n=*/2048, /*k=*/16, /*eta=*/0.1);
  EXPECT_EQ(config.max_updates, 278);  // 1 + floor(ln 16 / 0.01)
  EXPECT_DOUBLE_EQ(config.tau, 1.6);
  EXPECT_NEAR(config.sigma, 33.3466640010661, 1e-10);   // sqrt(1112)
  EXPECT_NEAR(config.eps_prime, 0.0424094464839985, 1e-12);
  EXPECT_FALSE(config.vacuous_guarantee());
  EXPECT_NO_THROW(config.Validate());
}

TEST(PvmwConfigTest, ValidateRejectsBrokenIdentities) {
  SilenceWarnings();
  PvmwConfig config = PvmwConfig::FromEta(1.0, 0.1, 64, 2048, 16, 0.1);
  PvmwConfig broken = config;
  broken.tau = 1.0;
  EXPECT_THROW(broken.Validate(), std::invalid_argument);
  broken = config;
  broken.max_updates += 1;
  EXPECT_THROW(broken.Validate(), std::invalid_argument);
  broken = config;
  broken.sigma *= 1.01;
  EXPECT_THROW(broken.Validate(), std::invalid_argument);
  broken = config;
  broken.eps_prime *= 0.5;
  EXPECT_THROW(broken.Validate(), std::invalid_argument);
}

TEST(DeriveConfigTest, BisectionContract) {
  SilenceWarnings();
  for (const auto& [n, k, t] : std::vector<std::tuple<std::int64_t, int, std::int64_t>>{
           {2048, 16, 64}, {100000, 4, 32}, {1000000000, 256, 1024}}) {
    const PvmwConfig config = DeriveConfig(0.5, 0.1, t, n, k);
    const double eta = config.eta;
    EXPECT_GT(eta, EtaLowerBound(eta, 0.5, 0.1, t, n, k));
    const double slightly_less = eta * (1.0 - 1e-6);
    EXPECT_LE(slightly_less,
              EtaLowerBound(slightly_less, 0.5, 0.1, t, n, k));
  }
}

TEST(DeriveConfigTest, WarnsInVacuousRegimeAndOutOfRangeRho) {
  std::vector<std::string> warnings;
  SetWarningHandler([&](const std::string& m) { warnings.push_back(m); });
  const PvmwConfig config = DeriveConfig(1.0, 0.1, 64, 2048, 16);
  SetWarningHandler(nullptr);
  EXPECT_TRUE(config.vacuous_guarantee());
  ASSERT_EQ(warnings.size(), 2u);
  EXPECT_NE(warnings[0].find("outside the analyzed range"), std::string::npos);
  EXPECT_NE(warnings[1].find("vacuous"), std::string::npos);
  // At bench sizes the derived rate is far above the analysis regime.
  EXPECT_GT(config.eta, 0.1);
  EXPECT_EQ(config.max_updates, 1);
}

TEST(TheoreticalAlphaTest, EighteenEtaAndMonotoneInN) {
  SilenceWarnings();
  const PvmwConfig pinned = PvmwConfig::FromEta(1.0, 0.1, 64, 2048, 16, 0.1);
  EXPECT_DOUBLE_EQ(TheoreticalAlpha(pinned), 1.8);

  const PvmwConfig small = DeriveConfig(0.9, 0.1, 64, 4096, 16);
  const PvmwConfig large = DeriveConfig(0.9, 0.1, 64, 4 * 4096, 16);
  EXPECT_LT(TheoreticalAlpha(large), TheoreticalAlpha(small));
}

TEST(PvmwSessionTest, OpensWithUniformBeliefsAndChargedLedger) {
  SilenceWarnings();
  const Dataset data = RandomDataset(256, 8, 3);
  const PvmwConfig config = PvmwConfig::FromEta(0.8, 0.1, 16, 256, 8, 0.12);
  PvmwSession session(data, config, 99);
  EXPECT_NEAR(Potential(session.beliefs(), data),
              std::log(8.0), 1e-12);
  EXPECT_NEAR(session.ledger().total(), 0.8, 1e-12 * 0.8);
  EXPECT_EQ(session.ledger().budget(), 0.8);
  EXPECT_EQ(session.status(), SessionStatus::kActive);

  PvmwSession twin(data, config, 99);
  EXPECT_EQ(session.threshold_noise(), twin.threshold_noise());
  PvmwSession other(data, config, 100);
  EXPECT_NE(session.threshold_noise(), other.threshold_noise());
}

// Every update slot charges 0.5 eps'^2 + 0.5 eps'^2 + 2/sigma^2 = rho/L_max.
TEST(PvmwSessionTest, PerSlotChargeIdentity) {
  SilenceWarnings();
  NoiseSource src(5, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const double rho = 0.05 + src.NextUniform();
    const double zeta = 0.2 + 0.6 * src.NextUniform();
    const double eta = 0.05 + 0.1 * src.NextUniform();
    const int k = 2 + static_cast<int>(src.NextUint64() % 15);
    const PvmwConfig config =
        PvmwConfig::FromEta(rho, 0.1, 8, 64, k, eta, zeta);
    const Dataset data = RandomDataset(64, k, 1000 + trial);
    PvmwSession session(data, config, trial);
    const auto charges = session.ledger().charges();
    ASSERT_EQ(charges.size(),
              static_cast<std::size_t>(3 * config.max_updates));
    const double slot_budget = rho / static_cast<double>(config.max_updates);
    for (std::size_t slot = 0; slot < charges.size(); slot += 3) {
      const double slot_total = charges[slot].rho + charges[slot + 1].rho +
                                charges[slot + 2].rho;
      EXPECT_NEAR(slot_total, slot_budget, 1e-12 * slot_budget);
    }
    EXPECT_NEAR(session.ledger().total(), rho, 1e-12 * rho);
  }
}

// f constant over the private value: the uniform-belief answer is exact.
TEST(PvmwSessionTest, PrivateValueIndependentQueryAnsweredExactly) {
  SilenceWarnings();
  const std::int64_t n = 512;
  const int k = 4, d = 8;
  const Dataset data = RandomDataset(n, k, 7);
  const PvmwConfig config = DeriveConfig(1.0, 0.1, 8, n, k);
  PvmwSession session(data, config, 11);
  const auto f = MakeSweepQuery(QueryFamily::kConstantPublic, 0, n, k, d, 13);
  const std::vector<double> truth = QueryTrueMean(*f, data);
  const QueryAnswer answer = session.Answer(*f);
  ASSERT_EQ(answer.status, AnswerStatus::kOk);
  EXPECT_NEAR(L2Distance(*answer.estimate, truth), 0.0, 1e-12);
  EXPECT_EQ(answer.updates_consumed, 0);
}

TEST(PvmwSessionTest, RepeatedQueriesReuseBeliefsWithoutUpdates) {
  SilenceWarnings();
  const std::int64_t n = 256;
  const int k = 4, d = 8;
  const Dataset data = RandomDataset(n, k, 17);
  const PvmwConfig config = DeriveConfig(1.0, 0.1, 8, n, k);
  PvmwSession session(data, config, 19);
  const auto f = MakeSweepQuery(QueryFamily::kRandomTable, 0, n, k, d, 23);
  const QueryAnswer first = session.Answer(*f);
  const QueryAnswer second = session.Answer(*f);
  ASSERT_EQ(first.status, AnswerStatus::kOk);
  ASSERT_EQ(second.status, AnswerStatus::kOk);
  EXPECT_EQ(*first.estimate, *second.estimate);
  EXPECT_EQ(second.updates_consumed, first.updates_consumed);
}

// A sharp query on a non-vacuous config forces updates; the answer converges
// below the threshold and is always a function of the beliefs.
TEST(PvmwSessionTest, UpdatePathConvergesBelowThreshold) {
  SilenceWarnings();
  const std::int64_t n = 2048;
  const int k = 2;
  std::vector<Example> examples(n);
  for (std::int64_t i = 0; i < n; ++i) {
    examples[i].public_payload = {static_cast<double>(i)};
    examples[i].private_value = 0;
  }
  const Dataset data(std::move(examples), k);
  // f(., 0) = +e1, f(., 1) = -e1: f(D) = e1, f(p^0) = 0, gap 1 > tau = 0.8.
  std::vector<double> table(static_cast<std::size_t>(n) * 2);
  for (std::int64_t i = 0; i < n; ++i) {
    table[static_cast<std::size_t>(i) * 2] = 1.0;
    table[static_cast<std::size_t>(i) * 2 + 1] = -1.0;
  }
  const TableQuery f(n, 2, 1, std::move(table));
  const PvmwConfig config = PvmwConfig::FromEta(1.0, 0.1, 4, n, k, 0.05);
  ASSERT_DOUBLE_EQ(config.tau, 0.8);
  PvmwSession session(data, config, 1);

  const QueryAnswer answer = session.Answer(f);
  ASSERT_EQ(answer.status, AnswerStatus::kOk);
  EXPECT_GT(answer.updates_consumed, 0);
  EXPECT_LT(answer.updates_consumed, config.max_updates);
  // The estimate is the belief mean at the final state, not the true value.
  const std::vector<double> belief_mean =
      QueryBeliefMean(f, session.beliefs(), data);
  EXPECT_EQ(*answer.estimate, belief_mean);
  // Below threshold within the noise margin.
  const std::vector<double> truth = QueryTrueMean(f, data);
  EXPECT_LT(L2Distance(*answer.estimate, truth), config.tau + 0.5);
}

TEST(PvmwSessionTest, NoiseTraceRecordsAlgorithmScales) {
  SilenceWarnings();
  const std::int64_t n = 2048;
  const int k = 2;
  const Dataset data = RandomDataset(n, k, 37);
  const PvmwConfig config = PvmwConfig::FromEta(1.0, 0.1, 4, n, k, 0.05);
  PvmwSession session(data, config, 41);
  const auto f = MakeSweepQuery(QueryFamily::kRandomTable, 0, n, k, 4, 43);
  session.Answer(*f);

  const double eps_n = config.eps_prime * static_cast<double>(n);
  bool saw_threshold = false, saw_query = false;
  for (const NoiseDrawRecord& record : session.noise_trace()) {
    switch (record.role) {
      case NoiseRole::kThreshold:
        EXPECT_DOUBLE_EQ(record.scale, 4.0 / eps_n);
        saw_threshold = true;
        break;
      case NoiseRole::kQuery:
        EXPECT_DOUBLE_EQ(record.scale, 8.0 / eps_n);
        saw_query = true;
        break;
      case NoiseRole::kNormEstimate:
        EXPECT_DOUBLE_EQ(record.scale, 2.0 / eps_n);
        break;
      case NoiseRole::kGaussian:
        EXPECT_DOUBLE_EQ(record.scale, 2.0 * config.sigma / n);
        EXPECT_EQ(record.count, 4);
        break;
    }
  }
  EXPECT_TRUE(saw_threshold);
  EXPECT_TRUE(saw_query);
}

// With L_max = 2 and heavy AboveThreshold noise (n = 1), spurious triggers
// eventually demand a second update: the session FAILs and stays poisoned.
TEST(PvmwSessionTest, FailPoisonsTheSession) {
  SilenceWarnings();
  const Dataset data = RandomDataset(1, 2, 47);
  const PvmwConfig config = PvmwConfig::FromEta(1.0, 0.45, 400, 1, 2, 0.7);
  ASSERT_EQ(config.max_updates, 2);
  const auto f = MakeSweepQuery(QueryFamily::kRandomTable, 0, 1, 2, 2, 53);

  bool failed = false;
  for (std::uint64_t seed = 1; seed <= 20 && !failed; ++seed) {
    PvmwSession session(data, config, seed);
    for (std::int64_t t = 0; t < 400; ++t) {
      const QueryAnswer answer = session.Answer(*f);
      if (answer.status == AnswerStatus::kFail) {
        failed = true;
        EXPECT_FALSE(answer.estimate.has_value());
        EXPECT_EQ(session.status(), SessionStatus::kFailed);
        EXPECT_THROW(session.Answer(*f), std::logic_error);
        break;
      }
    }
  }
  EXPECT_TRUE(failed);
}

TEST(PvmwSessionTest, QueryBudgetIsAHardCap) {
  SilenceWarnings();
  const std::int64_t n = 128;
  const int k = 4;
  const Dataset data = RandomDataset(n, k, 59);
  const PvmwConfig config = DeriveConfig(1.0, 0.1, 3, n, k);
  PvmwSession session(data, config, 61);
  const auto f = MakeSweepQuery(QueryFamily::kRandomTable, 0, n, k, 4, 67);
  for (int t = 0; t < 3; ++t) {
    EXPECT_EQ(session.Answer(*f).status, AnswerStatus::kOk);
  }
  EXPECT_EQ(session.status(), SessionStatus::kExhausted);
  EXPECT_THROW(session.Answer(*f), std::logic_error);
}

TEST(PvmwSessionTest, RejectsMismatchedConfig) {
  SilenceWarnings();
  const Dataset data = RandomDataset(64, 4, 71);
  const PvmwConfig config = PvmwConfig::FromEta(1.0, 0.1, 4, 128, 4, 0.1);
  EXPECT_THROW(PvmwSession(data, config, 1), std::invalid_argument);
}

// Changing one example's private value moves f(D) (and the belief gap) by at
// most 2/n in l2; exhaustive over all single-example swaps.
TEST(PvmwSensitivityTest, BruteForceSingleSwapBound) {
  SilenceWarnings();
  for (std::int64_t n : {2, 5, 8}) {
    for (int k : {2, 4}) {
      const Dataset data = RandomDataset(n, k, 1000 + n * 10 + k);
      const int d = 3;
      for (int rep = 0; rep < 3; ++rep) {
        const auto f = MakeSweepQuery(QueryFamily::kRandomTable, rep, n, k, d,
                                      2000 + n * 10 + k + rep);
        const BeliefState beliefs = RandomBeliefState(n, k, 3000 + rep);
        const std::vector<double> base_mean = QueryTrueMean(*f, data);
        const double base_gap =
            L2Distance(QueryBeliefMean(*f, beliefs, data), base_mean);
        const double bound = 2.0 / static_cast<double>(n) + 1e-12;
        for (std::int64_t i = 0; i < n; ++i) {
          for (int y = 0; y < k; ++y) {
            if (y == data.example(i).private_value) continue;
            std::vector<Example> swapped(data.examples());
            swapped[static_cast<std::size_t>(i)].private_value = y;
            const Dataset neighbor(std::move(swapped), k);
            const std::vector<double> neighbor_mean =
                QueryTrueMean(*f, neighbor);
            EXPECT_LE(L2Distance(base_mean, neighbor_mean), bound);
            const double neighbor_gap = L2Distance(
                QueryBeliefMean(*f, beliefs, neighbor), neighbor_mean);
            EXPECT_LE(std::abs(base_gap - neighbor_gap), bound);
          }
        }
      }
    }
  }
}

}  // namespace
}  // namespace semidp
