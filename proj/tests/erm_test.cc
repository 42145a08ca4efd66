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

#include "semidp/erm.h"

#include <cmath>

#include <gtest/gtest.h>

#include "semidp/dataset_io.h"
#include "semidp/harness.h"
#include "semidp/noise.h"
#include "semidp/util.h"

namespace semidp {
namespace {

void SilenceWarnings() {
  SetWarningHandler([](const std::string&) {});
}

TEST(ProjectBallTest, IdentityInsideForcedScaleOutside) {
  const std::vector<double> inside = {0.3, -0.4};
  EXPECT_EQ(ProjectBall(inside, 1.0), inside);
  const std::vector<double> outside = {2.0, 0.0};
  const std::vector<double> projected = ProjectBall(outside, 1.0);
  EXPECT_DOUBLE_EQ(projected[0], 1.0);
  EXPECT_DOUBLE_EQ(projected[1], 0.0);

  NoiseSource src(3, 0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> w(4);
    for (double& x : w) x = 3.0 * src.NextGaussian();
    const double radius = 0.5 + src.NextUniform();
    const std::vector<double> p = ProjectBall(w, radius);
    EXPECT_LE(L2Norm(p), radius * (1.0 + 1e-12));
    const std::vector<double> twice = ProjectBall(p, radius);  // idempotent
    for (std::size_t j = 0; j < p.size(); ++j) {
      EXPECT_NEAR(twice[j], p[j], 1e-14);
    }
  }
  EXPECT_THROW(ProjectBall(inside, 0.0), std::invalid_argument);
}

TEST(HardInstanceConvexTest, ClosedFormOptimum) {
  const HardInstance inst = HardInstanceConvex(4, 3, 1.0, 1.0, 5);
  EXPECT_DOUBLE_EQ(inst.optimum_value, -0.5);  // -RG/sqrt(4)
  EXPECT_NEAR(EmpiricalRisk(inst.problem, inst.dataset, inst.optimum),
              inst.optimum_value, 1e-12);
  // Linear loss vanishes at the origin.
  const std::vector<double> origin(static_cast<std::size_t>(inst.problem.dim), 0.0);
  EXPECT_DOUBLE_EQ(EmpiricalRisk(inst.problem, inst.dataset, origin), 0.0);
  EXPECT_NEAR(L2Norm(inst.optimum), 1.0, 1e-12);  // on the sphere
}

// The minimizer of a linear function over a ball is -R times the normalized
// mean gradient; re-derive it independently of the generator.
TEST(HardInstanceConvexTest, AnalyticMinimizerMatches) {
  const HardInstance inst = HardInstanceConvex(2, 2, 1.5, 2.0, 7);
  const std::vector<double> origin(static_cast<std::size_t>(inst.problem.dim), 0.0);
  std::vector<double> mean_grad = ExactMeanGradient(inst.problem, inst.dataset, origin);
  const double norm = L2Norm(mean_grad);
  ASSERT_GT(norm, 0.0);
  for (std::size_t j = 0; j < mean_grad.size(); ++j) {
    EXPECT_NEAR(inst.optimum[j], -1.5 * mean_grad[j] / norm, 1e-9);
  }
}

TEST(HardInstanceConvexTest, MemoryGuard) {
  EXPECT_THROW(HardInstanceConvex(1 << 22, 1 << 10, 1.0, 1.0, 1),
               std::invalid_argument);
}

TEST(HardInstanceStronglyConvexTest, SingleExampleOptimum) {
  const HardInstance inst = HardInstanceStronglyConvex(1, 3, 2.0, 4.0, 9);
  // R = 0.5 G / mu = 0.25; the optimum is R e_{j(0, y_0)} with value 0.
  EXPECT_DOUBLE_EQ(inst.optimum_value, 0.0);
  EXPECT_NEAR(L2Norm(inst.optimum), 0.25, 1e-15);
  EXPECT_NEAR(EmpiricalRisk(inst.problem, inst.dataset, inst.optimum), 0.0,
              1e-15);
}

// Excess risk of the quadratic instance is exactly (mu/2) ||w - w*||^2.
TEST(HardInstanceStronglyConvexTest, ExactExcessIdentity) {
  const HardInstance inst = HardInstanceStronglyConvex(6, 3, 1.0, 2.0, 11);
  NoiseSource src(13, 0);
  const double mu = inst.problem.strong_convexity;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(inst.problem.dim));
    for (double& x : w) x = 0.3 * src.NextGaussian();
    const double excess =
        EmpiricalRisk(inst.problem, inst.dataset, w) - inst.optimum_value;
    double dist2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double dj = w[j] - inst.optimum[j];
      dist2 += dj * dj;
    }
    EXPECT_NEAR(excess, 0.5 * mu * dist2, 1e-10);
  }
}

TEST(HardInstanceStronglyConvexTest, GradientVanishesAtOptimum) {
  const HardInstance inst = HardInstanceStronglyConvex(5, 4, 1.0, 1.0, 17);
  const std::vector<double> grad =
      ExactMeanGradient(inst.problem, inst.dataset, inst.optimum);
  EXPECT_NEAR(L2Norm(grad), 0.0, 1e-10);
}

// Per-example gradients of both instances agree with central finite
// differences of the per-example losses.
TEST(HardInstanceTest, GradientsMatchFiniteDifferences) {
  NoiseSource src(19, 0);
  const HardInstance convex = HardInstanceConvex(3, 2, 1.0, 1.5, 21);
  const HardInstance quad = HardInstanceStronglyConvex(3, 2, 1.0, 2.0, 23);
  for (const HardInstance* inst : {&convex, &quad}) {
    const int d = inst->problem.dim;
    std::vector<double> w(static_cast<std::size_t>(d));
    for (double& x : w) x = 0.2 * src.NextGaussian();
    std::vector<double> grad(w.size());
    for (std::int64_t i = 0; i < inst->dataset.size(); ++i) {
      const Example& x = inst->dataset.example(i);
      inst->problem.per_example_gradient(w, x, grad);
      for (int j = 0; j < d; ++j) {
        const double h = 1e-5;
        std::vector<double> plus = w, minus = w;
        plus[static_cast<std::size_t>(j)] += h;
        minus[static_cast<std::size_t>(j)] -= h;
        const double fd = (inst->problem.per_example_loss(plus, x) -
                           inst->problem.per_example_loss(minus, x)) /
                          (2.0 * h);
        const double g = grad[static_cast<std::size_t>(j)];
        EXPECT_NEAR(g, fd, 1e-6 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST(ReplicateExamplesTest, PatternAndMeanInvariance) {
  const Dataset data = RandomDataset(2, 3, 29);
  const Dataset same = ReplicateExamples(data, 1);
  EXPECT_EQ(same.size(), 2);

  const Dataset tripled = ReplicateExamples(data, 3);
  ASSERT_EQ(tripled.size(), 6);
  for (int copy = 0; copy < 3; ++copy) {
    EXPECT_EQ(tripled.example(copy).private_value,
              data.example(0).private_value);
    EXPECT_EQ(tripled.example(3 + copy).private_value,
              data.example(1).private_value);
  }

  // Means are invariant under replication (payloads repeat in place).
  std::vector<double> table = {0.3, -0.1, 0.5, 0.2, -0.4, 0.6};
  const TableQuery f(2, 3, 1, std::move(table));
  const CallbackQuery on_replica(
      1, [&](const PublicPayload& pub, int y, std::span<double> out) {
        // Replicated payloads keep the original public index.
        f.Eval(pub, y, out);
      });
  const std::vector<double> base = QueryTrueMean(f, data);
  const std::vector<double> replicated = QueryTrueMean(on_replica, tripled);
  EXPECT_NEAR(base[0], replicated[0], 1e-15);
}

ErmProblem ZeroLossProblem(int dim) {
  ErmProblem problem;
  problem.dim = dim;
  problem.lipschitz = 1.0;
  problem.radius = 1.0;
  problem.per_example_loss = [](std::span<const double>, const Example&) {
    return 0.0;
  };
  problem.per_example_gradient = [](std::span<const double>, const Example&,
                                    std::span<double> out) {
    for (double& x : out) x = 0.0;
  };
  problem.reference_optimum_value = 0.0;
  return problem;
}

TEST(PvmwGradientOracleTest, PrivateIndependentLossIsExact) {
  SilenceWarnings();
  const std::int64_t n = 256;
  const int k = 4;
  const Dataset data = RandomDataset(n, k, 31);
  // Loss ignores the private value: gradient = payload-dependent unit vector.
  ErmProblem problem;
  problem.dim = 3;
  problem.lipschitz = 1.0;
  problem.radius = 1.0;
  problem.per_example_gradient = [](std::span<const double>, const Example& x,
                                    std::span<double> out) {
    out[0] = std::cos(x.public_payload[0]);
    out[1] = std::sin(x.public_payload[0]);
    out[2] = 0.0;
  };
  problem.per_example_loss = [](std::span<const double> w, const Example& x) {
    return w[0] * std::cos(x.public_payload[0]) +
           w[1] * std::sin(x.public_payload[0]);
  };

  const PvmwConfig config = DeriveConfig(1.0, 0.1, 4, n, k);
  PvmwSession session(data, config, 37);
  const std::vector<double> w(3, 0.0);
  const auto oracle = PvmwGradientOracle(session, problem, w, 1.0);
  ASSERT_TRUE(oracle.has_value());
  const std::vector<double> exact = ExactMeanGradient(problem, data, w);
  EXPECT_NEAR(L2Distance(*oracle, exact), 0.0, 1e-12);
  EXPECT_EQ(session.update_count(), 0);
}

TEST(PvmwGradientOracleTest, HardInstanceErrorWithinTheoreticalAlpha) {
  SilenceWarnings();
  const HardInstance inst = HardInstanceConvex(512, 4, 1.0, 1.0, 41);
  const PvmwConfig config = DeriveConfig(1.0, 0.1, 8, 512, 4);
  PvmwSession session(inst.dataset, config, 43);
  const std::vector<double> w(static_cast<std::size_t>(inst.problem.dim), 0.0);
  const auto oracle = PvmwGradientOracle(session, inst.problem, w,
                                         inst.problem.lipschitz);
  ASSERT_TRUE(oracle.has_value());
  const std::vector<double> exact =
      ExactMeanGradient(inst.problem, inst.dataset, w);
  EXPECT_LE(L2Distance(*oracle, exact),
            inst.problem.lipschitz * TheoreticalAlpha(config));
}

TEST(PvmwGradientOracleTest, PoisonedSessionPropagates) {
  SilenceWarnings();
  const Dataset data = RandomDataset(1, 2, 47);
  const PvmwConfig config = PvmwConfig::FromEta(1.0, 0.45, 400, 1, 2, 0.7);
  const auto f = MakeSweepQuery(QueryFamily::kRandomTable, 0, 1, 2, 2, 53);
  ErmProblem problem = ZeroLossProblem(2);
  bool failed = false;
  for (std::uint64_t seed = 1; seed <= 20 && !failed; ++seed) {
    PvmwSession session(data, config, seed);
    for (int t = 0; t < 400; ++t) {
      if (session.Answer(*f).status == AnswerStatus::kFail) {
        failed = true;
        const std::vector<double> w(2, 0.0);
        EXPECT_THROW(PvmwGradientOracle(session, problem, w, 1.0),
                     std::logic_error);
        break;
      }
    }
  }
  EXPECT_TRUE(failed);
}

TEST(SolveConvexTest, DebugRateOnHardInstance) {
  SilenceWarnings();
  const HardInstance inst = HardInstanceConvex(64, 2, 1.0, 1.0, 59);
  SolveOptions options;
  options.exact_gradient_debug = true;
  options.steps = 2000;
  const ErmReport report =
      SolveConvex({inst.problem}, inst.dataset, /*rho=*/1.0, options);
  ASSERT_EQ(report.problems.size(), 1u);
  EXPECT_FALSE(report.failed);
  const double excess = report.problems[0].excess_risk_vs_reference;
  EXPECT_GE(excess, -1e-12);
  EXPECT_LE(excess, 1.5 * 1.0 * 1.0 / std::sqrt(2000.0));
}

TEST(SolveConvexTest, ZeroLossIsAlwaysOptimal) {
  SilenceWarnings();
  const Dataset data = RandomDataset(64, 2, 61);
  SolveOptions options;
  options.steps = 50;
  const ErmReport report =
      SolveConvex({ZeroLossProblem(4)}, data, /*rho=*/1.0, options);
  EXPECT_FALSE(report.failed);
  EXPECT_NEAR(report.problems[0].excess_risk_vs_reference, 0.0, 1e-15);
}

TEST(SolveConvexTest, SharedSessionTreatsIdenticalProblemsSymmetrically) {
  SilenceWarnings();
  std::vector<double> first, second;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const HardInstance inst = HardInstanceConvex(128, 2, 1.0, 1.0, 63);
    SolveOptions options;
    options.steps = 200;
    options.seed = seed;
    const ErmReport report = SolveConvex({inst.problem, inst.problem},
                                         inst.dataset, /*rho=*/1.0, options);
    ASSERT_FALSE(report.failed);
    first.push_back(report.problems[0].excess_risk_vs_reference);
    second.push_back(report.problems[1].excess_risk_vs_reference);
  }
  const double m1 = Median(first);
  const double m2 = Median(second);
  EXPECT_LE(m1, 2.0 * m2);
  EXPECT_LE(m2, 2.0 * m1);
}

TEST(SolveConvexTest, DefaultStepCountIsCappedNSquared) {
  SilenceWarnings();
  const HardInstance inst = HardInstanceConvex(8, 2, 1.0, 1.0, 67);
  SolveOptions options;
  options.exact_gradient_debug = true;
  options.step_cap = 100;
  const ErmReport report =
      SolveConvex({inst.problem}, inst.dataset, 1.0, options);
  EXPECT_EQ(report.problems[0].steps_planned, 64);  // n^2 below the cap
  options.step_cap = 40;
  const ErmReport capped =
      SolveConvex({inst.problem}, inst.dataset, 1.0, options);
  EXPECT_EQ(capped.problems[0].steps_planned, 40);
}

TEST(SolveStronglyConvexTest, DebugGeometricConvergence) {
  SilenceWarnings();
  const HardInstance inst = HardInstanceStronglyConvex(32, 2, 1.0, 1.0, 71);
  const double mu = inst.problem.strong_convexity;
  std::vector<double> excess_trace;
  SolveOptions options;
  options.exact_gradient_debug = true;
  options.steps = 30;
  options.step_callback = [&](int, std::int64_t, std::span<const double> w) {
    double dist2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double dj = w[j] - inst.optimum[j];
      dist2 += dj * dj;
    }
    excess_trace.push_back(0.5 * mu * dist2);
  };
  const ErmReport report =
      SolveStronglyConvex({inst.problem}, inst.dataset, 1.0, options);
  EXPECT_FALSE(report.failed);

  // lambda~ = 2 lambda, mu~ = mu/2: per-step excess ratio <= exp(-1/4).
  const double ratio_bound = std::exp(-0.25) + 1e-9;
  for (std::size_t s = 1; s < excess_trace.size(); ++s) {
    if (excess_trace[s - 1] < 1e-12) break;
    EXPECT_LE(excess_trace[s], ratio_bound * excess_trace[s - 1]);
    EXPECT_LE(excess_trace[s], excess_trace[s - 1]);  // monotone
  }
  // Final excess beats (lambda~ R^2 / 2) exp(-(mu~/lambda~) q) + 1e-12.
  const double r = inst.problem.radius;
  EXPECT_LE(excess_trace.back(),
            inst.problem.smoothness * r * r * std::exp(-0.25 * 30) + 1e-12);
}

TEST(SolveStronglyConvexTest, StartingAtOptimumStaysAtNoiseFloor) {
  SilenceWarnings();
  const HardInstance inst = HardInstanceStronglyConvex(256, 4, 1.0, 1.0, 73);
  SolveOptions options;
  options.start_point = inst.optimum;
  options.steps = 5;
  const ErmReport report =
      SolveStronglyConvex({inst.problem}, inst.dataset, 1.0, options);
  ASSERT_FALSE(report.failed);
  EXPECT_GT(report.inexactness_upsilon, 0.0);
  EXPECT_LE(report.problems[0].excess_risk_vs_reference,
            10.0 * report.inexactness_upsilon);
}

TEST(SolveStronglyConvexTest, QFormulaFloorsAtOne) {
  SilenceWarnings();
  // lambda R^2 / n < 1 drives the printed step count negative; floor at 1.
  const HardInstance inst = HardInstanceStronglyConvex(1024, 2, 1.0, 1.0, 79);
  SolveOptions options;
  options.exact_gradient_debug = true;
  const ErmReport report =
      SolveStronglyConvex({inst.problem}, inst.dataset, 1.0, options);
  EXPECT_EQ(report.problems[0].steps_planned, 1);
}

TEST(SolveStronglyConvexTest, RequiresStrongConvexityAndSmoothness) {
  SilenceWarnings();
  const Dataset data = RandomDataset(8, 2, 83);
  EXPECT_THROW(SolveStronglyConvex({ZeroLossProblem(2)}, data, 1.0, {}),
               std::invalid_argument);
}

TEST(ErmReportTest, DpOverloadRoutesThroughConversion) {
  SilenceWarnings();
  const HardInstance inst = HardInstanceConvex(64, 2, 1.0, 1.0, 89);
  SolveOptions options;
  options.steps = 20;
  const ErmReport report = SolveConvex({inst.problem}, inst.dataset,
                                       DpParams{1.0, 1e-6}, options);
  EXPECT_FALSE(report.failed);
  EXPECT_NEAR(report.rho, 0.1 / std::log(1e6), 1e-15);
}

}  // namespace
}  // namespace semidp
