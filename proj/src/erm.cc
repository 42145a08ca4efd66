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
#include <stdexcept>
#include <string>

#include "semidp/accountant.h"
#include "semidp/parallel.h"
#include "semidp/util.h"

namespace semidp {

namespace {

constexpr std::int64_t kMaxHardInstanceDim = std::int64_t{1} << 24;

void CheckProblem(const ErmProblem& problem) {
  if (problem.dim < 1) throw std::invalid_argument("ErmProblem: dim must be >= 1");
  if (!(problem.lipschitz > 0.0)) {
    throw std::invalid_argument("ErmProblem: lipschitz bound must be > 0");
  }
  if (!problem.per_example_gradient) {
    throw std::invalid_argument("ErmProblem: missing per_example_gradient");
  }
  if (problem.strong_convexity < 0.0 ||
      (std::isfinite(problem.smoothness) &&
       problem.strong_convexity > problem.smoothness)) {
    throw std::invalid_argument("ErmProblem: need 0 <= mu <= lambda");
  }
}

// Spot check of the gradient norm bound at a few random points; violations
// only warn, since the query path clips defensively anyway.
void SpotCheckLipschitz(const ErmProblem& problem, const Dataset& data,
                        double radius, std::uint64_t seed) {
  NoiseSource src(seed, 0xE51);
  std::vector<double> w(static_cast<std::size_t>(problem.dim));
  std::vector<double> grad(w.size());
  for (int trial = 0; trial < 3; ++trial) {
    for (double& x : w) x = src.NextGaussian();
    const double norm = L2Norm(w);
    const double target = radius * (trial == 0 ? 0.0 : (trial == 1 ? 0.5 : 1.0));
    if (norm > 0.0) {
      for (double& x : w) x *= target / norm;
    }
    const std::int64_t i =
        static_cast<std::int64_t>(src.NextUint64() % static_cast<std::uint64_t>(data.size()));
    problem.per_example_gradient(w, data.example(i), grad);
    if (L2Norm(grad) > problem.lipschitz * (1.0 + 1e-9)) {
      Warn("ErmProblem: per-example gradient norm " + FormatDouble(L2Norm(grad)) +
           " exceeds the declared bound " + FormatDouble(problem.lipschitz) +
           "; query evaluations will be clipped");
      return;
    }
  }
}

std::unique_ptr<LinearVectorQuery> MakeGradientQuery(
    const ErmProblem& problem, std::span<const double> w, double normalizer) {
  if (problem.gradient_query_factory) {
    return problem.gradient_query_factory(w, normalizer);
  }
  std::vector<double> w_copy(w.begin(), w.end());
  const auto grad = problem.per_example_gradient;
  const double inv = 1.0 / normalizer;
  return std::make_unique<CallbackQuery>(
      problem.dim,
      [w_copy = std::move(w_copy), grad, inv](const PublicPayload& pub, int y,
                                              std::span<double> out) {
        Example x;
        x.public_payload = pub;
        x.private_value = y;
        grad(w_copy, x, out);
        for (double& v : out) v *= inv;
      });
}

struct SessionPlan {
  PvmwConfig config;
  double rho;
};

SessionPlan PlanSession(const Dataset& data, double rho,
                        std::int64_t total_queries,
                        const SolveOptions& options) {
  const double beta =
      options.beta.value_or(1.0 / static_cast<double>(data.size()));
  SessionPlan plan{DeriveConfig(rho, beta, total_queries, data.size(),
                                data.private_domain_size(), options.zeta,
                                options.trunc_bound),
                   rho};
  return plan;
}

double MaxLipschitz(const std::vector<ErmProblem>& problems) {
  double g = 0.0;
  for (const auto& p : problems) g = std::max(g, p.lipschitz);
  return g;
}

}  // namespace

std::vector<double> ProjectBall(std::span<const double> w, double radius) {
  std::vector<double> out(w.begin(), w.end());
  ProjectBallInPlace(out, radius);
  return out;
}

void ProjectBallInPlace(std::span<double> w, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("ProjectBall: radius must be positive");
  }
  const double norm = L2Norm(w);
  if (norm > radius) {
    const double s = radius / norm;
    for (double& x : w) x *= s;
  }
}

std::optional<std::vector<double>> PvmwGradientOracle(
    PvmwSession& session, const ErmProblem& problem, std::span<const double> w,
    double normalizer) {
  const std::unique_ptr<LinearVectorQuery> query =
      MakeGradientQuery(problem, w, normalizer);
  const QueryAnswer answer = session.Answer(*query);
  if (answer.status == AnswerStatus::kFail) return std::nullopt;
  std::vector<double> gradient = std::move(*answer.estimate);
  for (double& x : gradient) x *= normalizer;
  return gradient;
}

std::optional<std::vector<double>> PvmwGradientOracle(
    PvmwSession& session, const ErmProblem& problem,
    std::span<const double> w) {
  return PvmwGradientOracle(session, problem, w, problem.lipschitz);
}

double EmpiricalRisk(const ErmProblem& problem, const Dataset& data,
                     std::span<const double> w) {
  if (!problem.per_example_loss) {
    throw std::invalid_argument("EmpiricalRisk: missing per_example_loss");
  }
  const double sum = parallel::DeterministicScalarSum(
      static_cast<std::size_t>(data.size()),
      [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
          s += problem.per_example_loss(w, data.example(static_cast<std::int64_t>(i)));
        }
        return s;
      });
  return sum / static_cast<double>(data.size());
}

std::vector<double> ExactMeanGradient(const ErmProblem& problem,
                                      const Dataset& data,
                                      std::span<const double> w) {
  const auto d = static_cast<std::size_t>(problem.dim);
  std::vector<double> out(d);
  parallel::DeterministicVectorSum(
      static_cast<std::size_t>(data.size()), d, out,
      [&](std::size_t begin, std::size_t end, std::span<double> acc) {
        std::vector<double> grad(d);
        for (std::size_t i = begin; i < end; ++i) {
          problem.per_example_gradient(
              w, data.example(static_cast<std::int64_t>(i)), grad);
          for (std::size_t j = 0; j < d; ++j) acc[j] += grad[j];
        }
      });
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (double& x : out) x *= inv_n;
  return out;
}

namespace {

// Shared solver skeleton. StepFn(problem_index, step, w, gradient) must
// update w in place.
ErmReport RunSolver(const std::vector<ErmProblem>& problems,
                    const Dataset& data, double rho,
                    const SolveOptions& options,
                    std::span<const std::int64_t> steps_per_problem,
                    const std::function<void(int, std::int64_t,
                                             std::vector<double>&,
                                             std::span<const double>)>& apply,
                    bool average_iterates) {
  ErmReport report;
  report.rho = rho;
  report.problems.resize(problems.size());

  std::int64_t total_queries = 0;
  for (std::int64_t q : steps_per_problem) total_queries += q;

  const double normalizer = MaxLipschitz(problems);
  std::optional<PvmwSession> session;
  if (!options.exact_gradient_debug) {
    const SessionPlan plan = PlanSession(data, rho, total_queries, options);
    session.emplace(data, plan.config, options.seed);
    report.eta = plan.config.eta;
    report.theoretical_alpha = TheoreticalAlpha(plan.config);
    report.vacuous_guarantee = plan.config.vacuous_guarantee();
  }

  for (std::size_t pi = 0; pi < problems.size(); ++pi) {
    const ErmProblem& problem = problems[pi];
    ProblemResult& result = report.problems[pi];
    const std::int64_t q = steps_per_problem[pi];
    result.steps_planned = q;

    const double radius = problem.radius;
    std::vector<double> w =
        options.start_point.value_or(std::vector<double>(problem.dim, 0.0));
    if (static_cast<int>(w.size()) != problem.dim) {
      throw std::invalid_argument("SolveOptions: start point dim mismatch");
    }
    ProjectBallInPlace(w, radius);
    std::vector<double> averaged(w.begin(), w.end());

    bool failed = false;
    for (std::int64_t step = 0; step < q; ++step) {
      std::vector<double> gradient;
      if (options.exact_gradient_debug) {
        gradient = ExactMeanGradient(problem, data, w);
      } else {
        auto g = PvmwGradientOracle(*session, problem, w, normalizer);
        if (!g.has_value()) {
          failed = true;
          break;
        }
        gradient = std::move(*g);
        ++result.queries_used;
        ++report.oracle_queries_used;
      }
      apply(static_cast<int>(pi), step, w, gradient);
      if (average_iterates && step + 1 < q) {
        for (std::size_t j = 0; j < w.size(); ++j) averaged[j] += w[j];
      }
      if (options.step_callback) {
        options.step_callback(static_cast<int>(pi), step, w);
      }
    }
    if (failed) {
      report.failed = true;
      break;  // the shared session is poisoned; later problems get no result
    }
    if (average_iterates) {
      const double inv = 1.0 / static_cast<double>(q);
      for (double& x : averaged) x *= inv;
      result.iterate = std::move(averaged);
    } else {
      result.iterate = std::move(w);
    }
    if (problem.reference_optimum_value.has_value() && problem.per_example_loss) {
      result.excess_risk_vs_reference =
          EmpiricalRisk(problem, data, result.iterate) -
          *problem.reference_optimum_value;
    }
  }
  return report;
}

}  // namespace

ErmReport SolveConvex(const std::vector<ErmProblem>& problems,
                      const Dataset& data, double rho,
                      const SolveOptions& options) {
  if (problems.empty()) {
    throw std::invalid_argument("SolveConvex: no problems");
  }
  const double n = static_cast<double>(data.size());
  std::vector<std::int64_t> steps(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    CheckProblem(problems[i]);
    if (!(problems[i].radius > 0.0)) {
      throw std::invalid_argument("SolveConvex: radius must be > 0");
    }
    SpotCheckLipschitz(problems[i], data, problems[i].radius,
                       options.seed + i);
    const double n_squared = n * n;
    steps[i] = options.steps.value_or(static_cast<std::int64_t>(
        std::min(n_squared, static_cast<double>(options.step_cap))));
    if (steps[i] < 1) throw std::invalid_argument("SolveConvex: q must be >= 1");
  }

  // Projected subgradient descent, step R/(G sqrt(q)), averaged iterate.
  return RunSolver(
      problems, data, rho, options, steps,
      [&](int pi, std::int64_t /*step*/, std::vector<double>& w,
          std::span<const double> gradient) {
        const ErmProblem& problem = problems[static_cast<std::size_t>(pi)];
        const double step_size =
            problem.radius /
            (problem.lipschitz *
             std::sqrt(static_cast<double>(steps[static_cast<std::size_t>(pi)])));
        for (std::size_t j = 0; j < w.size(); ++j) {
          w[j] -= step_size * gradient[j];
        }
        ProjectBallInPlace(w, problem.radius);
      },
      /*average_iterates=*/true);
}

ErmReport SolveConvex(const std::vector<ErmProblem>& problems,
                      const Dataset& data, const DpParams& target,
                      const SolveOptions& options) {
  return SolveConvex(problems, data,
                     RhoForDpTarget(target.epsilon, target.delta), options);
}

ErmReport SolveStronglyConvex(const std::vector<ErmProblem>& problems,
                              const Dataset& data, double rho,
                              const SolveOptions& options) {
  if (problems.empty()) {
    throw std::invalid_argument("SolveStronglyConvex: no problems");
  }
  std::vector<std::int64_t> steps(problems.size());
  std::vector<double> radii(problems.size());
  for (std::size_t i = 0; i < problems.size(); ++i) {
    CheckProblem(problems[i]);
    const ErmProblem& p = problems[i];
    if (!(p.strong_convexity > 0.0) || !std::isfinite(p.smoothness)) {
      throw std::invalid_argument(
          "SolveStronglyConvex: need mu > 0 and finite lambda");
    }
    // Domain radius defaults to 2 G / mu when the problem leaves it unset.
    radii[i] = p.radius > 0.0 ? p.radius
                              : 2.0 * p.lipschitz / p.strong_convexity;
    SpotCheckLipschitz(p, data, radii[i], options.seed + i);
    if (options.steps.has_value()) {
      steps[i] = *options.steps;
    } else {
      const double q_formula =
          std::ceil((40.0 * p.smoothness / p.strong_convexity) *
                    std::log(p.smoothness * radii[i] * radii[i] /
                             static_cast<double>(data.size())));
      steps[i] = q_formula >= 1.0 ? static_cast<std::int64_t>(q_formula) : 1;
    }
  }

  // Inexact primal gradient method: constant step 1/(2 lambda) against the
  // effective constants (2 lambda, mu/2); no function-value estimates used.
  ErmReport report = RunSolver(
      problems, data, rho, options, steps,
      [&](int pi, std::int64_t /*step*/, std::vector<double>& w,
          std::span<const double> gradient) {
        const ErmProblem& problem = problems[static_cast<std::size_t>(pi)];
        const double step_size = 1.0 / (2.0 * problem.smoothness);
        for (std::size_t j = 0; j < w.size(); ++j) {
          w[j] -= step_size * gradient[j];
        }
        ProjectBallInPlace(w, radii[static_cast<std::size_t>(pi)]);
      },
      /*average_iterates=*/false);

  if (!std::isnan(report.eta)) {
    const double g = MaxLipschitz(problems);
    const double xi = g * 18.0 * report.eta;
    double upsilon = 0.0;
    for (const auto& p : problems) {
      upsilon = std::max(upsilon, xi * xi * (1.0 / p.strong_convexity +
                                             1.0 / (2.0 * p.smoothness)));
    }
    report.inexactness_upsilon = upsilon;
  }
  return report;
}

ErmReport SolveStronglyConvex(const std::vector<ErmProblem>& problems,
                              const Dataset& data, const DpParams& target,
                              const SolveOptions& options) {
  return SolveStronglyConvex(problems, data,
                             RhoForDpTarget(target.epsilon, target.delta),
                             options);
}

namespace {

Dataset MakeIndexedDataset(std::int64_t n, int k, std::uint64_t seed) {
  NoiseSource src(seed, 0xDA7A);
  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    Example x;
    x.public_payload = {static_cast<double>(i)};
    x.private_value =
        static_cast<int>(src.NextUint64() % static_cast<std::uint64_t>(k));
    examples.push_back(std::move(x));
  }
  return Dataset(std::move(examples), k);
}

std::int64_t FlatIndex(const Example& x, int k) {
  return static_cast<std::int64_t>(x.public_payload.at(0)) * k +
         x.private_value;
}

}  // namespace

HardInstance HardInstanceConvex(std::int64_t n, int k, double radius,
                                double lipschitz, std::uint64_t seed) {
  if (n < 1 || k < 2) {
    throw std::invalid_argument("HardInstanceConvex: need n >= 1, k >= 2");
  }
  if (n * k > kMaxHardInstanceDim) {
    throw std::invalid_argument(
        "HardInstanceConvex: n*k = " + std::to_string(n * k) +
        " exceeds the memory guard");
  }
  Dataset dataset = MakeIndexedDataset(n, k, seed);
  const int dim = static_cast<int>(n * k);

  ErmProblem problem;
  problem.dim = dim;
  problem.lipschitz = lipschitz;
  problem.radius = radius;
  problem.per_example_loss = [lipschitz, k](std::span<const double> w,
                                            const Example& x) {
    return -lipschitz * w[static_cast<std::size_t>(FlatIndex(x, k))];
  };
  problem.per_example_gradient = [lipschitz, k](std::span<const double> /*w*/,
                                                const Example& x,
                                                std::span<double> out) {
    for (double& v : out) v = 0.0;
    out[static_cast<std::size_t>(FlatIndex(x, k))] = -lipschitz;
  };
  // Gradient is w-independent: the query is -e_{j(i,y)} regardless of w or
  // the normalizer handed down (normalizer == G for a single problem).
  problem.gradient_query_factory =
      [k, dim, lipschitz](std::span<const double> /*w*/, double normalizer) {
        return std::make_unique<AffineIndicatorQuery>(
            k, std::vector<double>{}, -lipschitz / normalizer, dim);
      };

  std::vector<double> optimum(static_cast<std::size_t>(dim), 0.0);
  const double mass = radius / std::sqrt(static_cast<double>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    optimum[static_cast<std::size_t>(FlatIndex(dataset.example(i), k))] = mass;
  }
  const double optimum_value =
      -radius * lipschitz / std::sqrt(static_cast<double>(n));
  problem.reference_optimum_value = optimum_value;
  return {std::move(problem), std::move(dataset), std::move(optimum),
          optimum_value};
}

HardInstance HardInstanceStronglyConvex(std::int64_t n, int k,
                                        double lipschitz, double mu,
                                        std::uint64_t seed) {
  if (n < 1 || k < 2) {
    throw std::invalid_argument(
        "HardInstanceStronglyConvex: need n >= 1, k >= 2");
  }
  if (!(mu > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument(
        "HardInstanceStronglyConvex: need G > 0, mu > 0");
  }
  if (n * k > kMaxHardInstanceDim) {
    throw std::invalid_argument(
        "HardInstanceStronglyConvex: n*k exceeds the memory guard");
  }
  Dataset dataset = MakeIndexedDataset(n, k, seed);
  const int dim = static_cast<int>(n * k);
  const double radius = 0.5 * lipschitz / mu;

  ErmProblem problem;
  problem.dim = dim;
  problem.lipschitz = lipschitz;
  problem.radius = radius;
  problem.strong_convexity = mu;
  problem.smoothness = mu;
  problem.per_example_loss = [mu, radius, k](std::span<const double> w,
                                             const Example& x) {
    // (mu/2) ||w - R e_j||^2 = (mu/2)(||w||^2 - 2 R w_j + R^2)
    const std::size_t j = static_cast<std::size_t>(FlatIndex(x, k));
    return 0.5 * mu *
           (SquaredL2Norm(w) - 2.0 * radius * w[j] + radius * radius);
  };
  problem.per_example_gradient = [mu, radius, k](std::span<const double> w,
                                                 const Example& x,
                                                 std::span<double> out) {
    for (std::size_t j = 0; j < w.size(); ++j) out[j] = mu * w[j];
    out[static_cast<std::size_t>(FlatIndex(x, k))] -= mu * radius;
  };
  problem.gradient_query_factory = [mu, radius, k, dim](
                                       std::span<const double> w,
                                       double normalizer) {
    // (1/normalizer) grad = (mu/normalizer) w - (mu R/normalizer) e_j.
    std::vector<double> base(w.size());
    const double s = mu / normalizer;
    for (std::size_t j = 0; j < w.size(); ++j) base[j] = s * w[j];
    return std::make_unique<AffineIndicatorQuery>(k, std::move(base),
                                                  -mu * radius / normalizer,
                                                  dim);
  };

  std::vector<double> optimum(static_cast<std::size_t>(dim), 0.0);
  const double mass = radius / static_cast<double>(n);
  for (std::int64_t i = 0; i < n; ++i) {
    optimum[static_cast<std::size_t>(FlatIndex(dataset.example(i), k))] = mass;
  }
  // L(w*) = (mu R^2 / 2)(1 - 1/n) in closed form.
  const double optimum_value =
      0.5 * mu * radius * radius * (1.0 - 1.0 / static_cast<double>(n));
  problem.reference_optimum_value = optimum_value;
  return {std::move(problem), std::move(dataset), std::move(optimum),
          optimum_value};
}

Dataset ReplicateExamples(const Dataset& data, int r) {
  if (r < 1) throw std::invalid_argument("ReplicateExamples: r must be >= 1");
  std::vector<Example> examples;
  examples.reserve(static_cast<std::size_t>(data.size()) * r);
  for (std::int64_t i = 0; i < data.size(); ++i) {
    for (int copy = 0; copy < r; ++copy) {
      examples.push_back(data.example(i));
    }
  }
  return Dataset(std::move(examples), data.private_domain_size());
}

}  // namespace semidp
