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

#ifndef SEMIDP_ERM_H_
#define SEMIDP_ERM_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "semidp/core.h"
#include "semidp/pvmw.h"

namespace semidp {

// An empirical risk minimization problem over the ball B_2(radius).
struct ErmProblem {
  int dim = 0;
  double lipschitz = 0.0;  // G: bound on per-example gradient norms
  double radius = 0.0;     // R: feasible ball radius
  double strong_convexity = 0.0;  // mu; 0 when merely convex
  double smoothness = std::numeric_limits<double>::infinity();  // lambda

  std::function<double(std::span<const double>, const Example&)>
      per_example_loss;
  std::function<void(std::span<const double>, const Example&,
                     std::span<double>)>
      per_example_gradient;

  // Optional fast query construction for (1/normalizer) * gradient at w;
  // the default wraps per_example_gradient in a dense callback query.
  std::function<std::unique_ptr<LinearVectorQuery>(std::span<const double>,
                                                   double)>
      gradient_query_factory;

  // Closed-form optimal value when known (benchmark instances).
  std::optional<double> reference_optimum_value;
};

struct ProblemResult {
  std::vector<double> iterate;  // empty when the run failed before finishing
  // Excess empirical risk against reference_optimum_value; NaN when no
  // reference is available. Computed from non-private data; experiment
  // reporting only.
  double excess_risk_vs_reference = std::numeric_limits<double>::quiet_NaN();
  std::int64_t queries_used = 0;
  std::int64_t steps_planned = 0;
};

struct ErmReport {
  std::vector<ProblemResult> problems;
  bool failed = false;
  std::int64_t oracle_queries_used = 0;
  double rho = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double theoretical_alpha = std::numeric_limits<double>::quiet_NaN();
  // Theoretical inexactness level (strongly convex case only):
  // (G * 18 eta)^2 * (1/mu + 1/(2 lambda)).
  double inexactness_upsilon = std::numeric_limits<double>::quiet_NaN();
  bool vacuous_guarantee = false;
};

struct SolveOptions {
  // Cap for the default per-problem step count min(n^2, step_cap) in the
  // convex solver. The analysis uses q = n^2; at bench scale the descent
  // term R G / sqrt(q) is negligible long before that.
  std::int64_t step_cap = 100000;
  std::optional<std::int64_t> steps;  // overrides the default q entirely
  std::optional<double> beta;         // default 1/n
  double zeta = 0.5;
  double trunc_bound = 3.0;
  // Bypass the private oracle and use exact mean gradients (debug).
  bool exact_gradient_debug = false;
  std::optional<std::vector<double>> start_point;  // default: ball center
  std::uint64_t seed = 1;
  // Invoked after every step with (problem index, step, iterate).
  std::function<void(int, std::int64_t, std::span<const double>)> step_callback;
};

// w unchanged when inside the ball, else rescaled onto the sphere.
std::vector<double> ProjectBall(std::span<const double> w, double radius);
void ProjectBallInPlace(std::span<double> w, double radius);

// Issues the query x -> (1/normalizer) * grad l(w; x) to the session and
// scales the answer back. Returns nullopt when the session FAILs. The
// normalizer defaults to the problem's own Lipschitz bound; multi-problem
// solvers pass the batch maximum so one normalization serves all queries.
std::optional<std::vector<double>> PvmwGradientOracle(
    PvmwSession& session, const ErmProblem& problem, std::span<const double> w,
    double normalizer);
std::optional<std::vector<double>> PvmwGradientOracle(
    PvmwSession& session, const ErmProblem& problem,
    std::span<const double> w);

// Projected subgradient descent with step R/(G sqrt(q)) and iterate
// averaging, driven by the private gradient oracle; all problems share one
// session with T = sum of per-problem step counts.
ErmReport SolveConvex(const std::vector<ErmProblem>& problems,
                      const Dataset& data, double rho,
                      const SolveOptions& options = {});
ErmReport SolveConvex(const std::vector<ErmProblem>& problems,
                      const Dataset& data, const DpParams& target,
                      const SolveOptions& options = {});

// Inexact primal gradient method w <- Proj(w - (1/(2 lambda)) g~(w)) for
// q = ceil((40 lambda / mu) ln(lambda R^2 / n)) steps (floored at 1).
ErmReport SolveStronglyConvex(const std::vector<ErmProblem>& problems,
                              const Dataset& data, double rho,
                              const SolveOptions& options = {});
ErmReport SolveStronglyConvex(const std::vector<ErmProblem>& problems,
                              const Dataset& data, const DpParams& target,
                              const SolveOptions& options = {});

// Mean loss over the dataset.
double EmpiricalRisk(const ErmProblem& problem, const Dataset& data,
                     std::span<const double> w);

// Exact mean gradient over the dataset (the debug oracle).
std::vector<double> ExactMeanGradient(const ErmProblem& problem,
                                      const Dataset& data,
                                      std::span<const double> w);

struct HardInstance {
  ErmProblem problem;
  Dataset dataset;
  std::vector<double> optimum;
  double optimum_value;
};

// Linear coordinate-indicator instance: loss(w, (i, y)) = -G <w, e_{ki+y}>
// over B_2(R) in d = n*k dimensions, y_i uniform. Optimum
// w* = (R/sqrt(n)) sum_i e_{k i + y_i} with value -RG/sqrt(n).
HardInstance HardInstanceConvex(std::int64_t n, int k, double radius,
                                double lipschitz, std::uint64_t seed);

// Quadratic instance: loss(w, (i, y)) = (mu/2) ||w - R e_{ki+y}||^2 with
// R = 0.5 G / mu; mu-strongly convex, mu-smooth, G-Lipschitz on B_2(R).
// Optimum w* = (R/n) sum_i e_{k i + y_i}.
HardInstance HardInstanceStronglyConvex(std::int64_t n, int k,
                                        double lipschitz, double mu,
                                        std::uint64_t seed);

// Each example repeated r consecutive times (AAABBB...); means are invariant.
Dataset ReplicateExamples(const Dataset& data, int r);

}  // namespace semidp

#endif  // SEMIDP_ERM_H_
