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
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "semidp/accountant.h"
#include "semidp/dataset_io.h"
#include "semidp/erm.h"
#include "semidp/mechanisms.h"
#include "semidp/noise.h"
#include "semidp/parallel.h"
#include "semidp/util.h"

namespace semidp {

namespace {

std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t state = seed ^ (salt * 0x9E3779B97f4A7C15ULL);
  return SplitMix64(state);
}

void FillUnitVector(NoiseSource& src, std::span<double> out) {
  double norm2 = 0.0;
  for (double& x : out) {
    x = src.NextGaussian();
    norm2 += x * x;
  }
  if (norm2 < 1e-24) {
    out[0] = 1.0;
    for (std::size_t j = 1; j < out.size(); ++j) out[j] = 0.0;
  } else {
    const double s = 1.0 / std::sqrt(norm2);
    for (double& x : out) x *= s;
  }
}

// Unit vector per (t, example, y); rows come from per-example streams so the
// table is identical regardless of threading.
std::unique_ptr<TableQuery> MakeRandomTableQuery(std::int64_t t, std::int64_t n,
                                                 int k, int d,
                                                 std::uint64_t seed) {
  std::vector<double> table(static_cast<std::size_t>(n) * k * d);
  parallel::ParallelForBlocks(
      static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          NoiseSource src(seed, ((static_cast<std::uint64_t>(t) + 1) << 32) |
                                    static_cast<std::uint64_t>(i));
          double* row = table.data() + i * static_cast<std::size_t>(k) * d;
          for (int y = 0; y < k; ++y) {
            FillUnitVector(src, {row + static_cast<std::size_t>(y) * d,
                                 static_cast<std::size_t>(d)});
          }
        }
      });
  return std::make_unique<TableQuery>(n, k, d, std::move(table));
}

// Value depends on the public index only, so it is answered exactly from any
// belief state; exercises the no-update path.
std::unique_ptr<TableQuery> MakeConstantPublicQuery(std::int64_t t,
                                                    std::int64_t n, int k,
                                                    int d, std::uint64_t seed) {
  std::vector<double> table(static_cast<std::size_t>(n) * k * d);
  parallel::ParallelForBlocks(
      static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        std::vector<double> cell(static_cast<std::size_t>(d));
        for (std::size_t i = begin; i < end; ++i) {
          NoiseSource src(seed, ((static_cast<std::uint64_t>(t) + 1) << 32) |
                                    static_cast<std::uint64_t>(i));
          FillUnitVector(src, cell);
          double* row = table.data() + i * static_cast<std::size_t>(k) * d;
          for (int y = 0; y < k; ++y) {
            std::copy(cell.begin(), cell.end(),
                      row + static_cast<std::size_t>(y) * d);
          }
        }
      });
  return std::make_unique<TableQuery>(n, k, d, std::move(table));
}

struct PrivacyPoint {
  double rho;
  double epsilon;  // NaN when rho was given directly
  double delta;
};

std::string OptionalNumber(double value) {
  return std::isnan(value) ? std::string() : FormatDouble(value);
}

}  // namespace

std::optional<Command> ParseCommand(const std::string& name) {
  if (name == "olvq-sweep") return Command::kOlvqSweep;
  if (name == "erm-convex") return Command::kErmConvex;
  if (name == "erm-strongly-convex") return Command::kErmStronglyConvex;
  if (name == "verify-lemma1") return Command::kVerifyLemma1;
  if (name == "mwu-props") return Command::kMwuProps;
  if (name == "audit") return Command::kAudit;
  return std::nullopt;
}

std::string CommandName(Command command) {
  switch (command) {
    case Command::kOlvqSweep: return "olvq-sweep";
    case Command::kErmConvex: return "erm-convex";
    case Command::kErmStronglyConvex: return "erm-strongly-convex";
    case Command::kVerifyLemma1: return "verify-lemma1";
    case Command::kMwuProps: return "mwu-props";
    case Command::kAudit: return "audit";
  }
  return "unknown";
}

std::optional<QueryFamily> ParseQueryFamily(const std::string& name) {
  if (name == "RANDOM_TABLE") return QueryFamily::kRandomTable;
  if (name == "GRADIENT") return QueryFamily::kGradient;
  if (name == "CONSTANT_PUBLIC") return QueryFamily::kConstantPublic;
  return std::nullopt;
}

std::string QueryFamilyName(QueryFamily family) {
  switch (family) {
    case QueryFamily::kRandomTable: return "RANDOM_TABLE";
    case QueryFamily::kGradient: return "GRADIENT";
    case QueryFamily::kConstantPublic: return "CONSTANT_PUBLIC";
  }
  return "unknown";
}

std::vector<std::string> ExperimentSpec::Validate() const {
  std::vector<std::string> bad;
  if (n_values.empty() ||
      std::any_of(n_values.begin(), n_values.end(),
                  [](std::int64_t n) { return n < 1; })) {
    bad.push_back("n");
  }
  if (k_values.empty() || std::any_of(k_values.begin(), k_values.end(),
                                      [](int k) { return k < 2; })) {
    bad.push_back("k");
  }
  if (d_values.empty() || std::any_of(d_values.begin(), d_values.end(),
                                      [](int d) { return d < 1; })) {
    bad.push_back("d");
  }
  if (!rho_values.empty() && !epsilon_values.empty()) {
    bad.push_back("rho/eps (mutually exclusive)");
  }
  if (std::any_of(rho_values.begin(), rho_values.end(),
                  [](double r) { return !(r > 0.0); })) {
    bad.push_back("rho");
  }
  if (std::any_of(epsilon_values.begin(), epsilon_values.end(),
                  [](double e) { return !(e > 0.0); })) {
    bad.push_back("eps");
  }
  if (!epsilon_values.empty() && !(delta > 0.0 && delta < 0.5)) {
    bad.push_back("delta");
  }
  if (seeds.empty()) bad.push_back("seeds");
  std::vector<std::uint64_t> sorted_seeds = seeds;
  std::sort(sorted_seeds.begin(), sorted_seeds.end());
  if (std::adjacent_find(sorted_seeds.begin(), sorted_seeds.end()) !=
      sorted_seeds.end()) {
    bad.push_back("seeds (must be distinct)");
  }
  if (num_queries < 1) bad.push_back("T");
  if (!(beta > 0.0 && beta < 0.5)) bad.push_back("beta");
  if (erm_steps < 0) bad.push_back("q");
  if (step_cap < 1) bad.push_back("step-cap");
  if (!(lipschitz > 0.0)) bad.push_back("lipschitz");
  if (!(radius > 0.0)) bad.push_back("radius");
  if (!(mu > 0.0)) bad.push_back("mu");
  if (command == Command::kVerifyLemma1) {
    if (trials < 10000) bad.push_back("trials");
    if (sigma_z_values.empty() ||
        std::any_of(sigma_z_values.begin(), sigma_z_values.end(),
                    [](double s) { return !(s > 0.0 && s <= 1.0); })) {
      bad.push_back("sigma-z");
    }
    if (support_size < 1) bad.push_back("support");
    if (lemma1_dim < 1) bad.push_back("lemma1-dim");
  }
  if (command == Command::kMwuProps && property_instances < 1) {
    bad.push_back("instances");
  }
  return bad;
}

std::string ExperimentSpec::CanonicalString() const {
  std::ostringstream out;
  const auto join_i = [&out](const auto& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out << ",";
      out << values[i];
    }
  };
  const auto join_f = [&out](const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) out << ",";
      out << FormatDouble(values[i]);
    }
  };
  out << "command=" << CommandName(command) << ";n=";
  join_i(n_values);
  out << ";k=";
  join_i(k_values);
  out << ";d=";
  join_i(d_values);
  out << ";rho=";
  join_f(rho_values);
  out << ";eps=";
  join_f(epsilon_values);
  out << ";delta=" << FormatDouble(delta) << ";seeds=";
  join_i(seeds);
  out << ";T=" << num_queries << ";family=" << QueryFamilyName(query_family)
      << ";beta=" << FormatDouble(beta) << ";q=" << erm_steps
      << ";step_cap=" << step_cap << ";G=" << FormatDouble(lipschitz)
      << ";R=" << FormatDouble(radius) << ";mu=" << FormatDouble(mu)
      << ";trials=" << trials << ";sigma_z=";
  join_f(sigma_z_values);
  out << ";support=" << support_size << ";lemma1_dim=" << lemma1_dim
      << ";instances=" << property_instances
      << ";debug=" << (debug_nonprivate ? 1 : 0);
  return out.str();
}

std::string ExperimentSpec::ConfigHash() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(CanonicalString())));
  return buf;
}

std::unique_ptr<LinearVectorQuery> MakeSweepQuery(QueryFamily family,
                                                  std::int64_t t,
                                                  std::int64_t n, int k, int d,
                                                  std::uint64_t seed) {
  switch (family) {
    case QueryFamily::kRandomTable:
      return MakeRandomTableQuery(t, n, k, d, seed);
    case QueryFamily::kConstantPublic:
      return MakeConstantPublicQuery(t, n, k, d, seed);
    case QueryFamily::kGradient:
      // The coordinate-indicator gradient query lives in n*k dimensions.
      return std::make_unique<AffineIndicatorQuery>(
          k, std::vector<double>{}, -1.0, static_cast<int>(n * k));
  }
  throw std::logic_error("MakeSweepQuery: unknown family");
}

BeliefState RandomBeliefState(std::int64_t n, int k, std::uint64_t seed) {
  NoiseSource src(seed, 0xBE11EF);
  std::vector<double> probs(static_cast<std::size_t>(n) * k);
  for (std::int64_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int y = 0; y < k; ++y) {
      const double w = std::exp(src.NextGaussian());
      probs[static_cast<std::size_t>(i) * k + y] = w;
      sum += w;
    }
    for (int y = 0; y < k; ++y) {
      probs[static_cast<std::size_t>(i) * k + y] /= sum;
    }
  }
  return BeliefState(n, k, std::move(probs));
}

std::optional<Condition1Case> BuildCondition1Case(std::int64_t n, int k, int d,
                                                  std::uint64_t seed) {
  NoiseSource src(seed, 0xC0D1);
  Dataset dataset = RandomDataset(n, k, MixSeed(seed, 1));
  BeliefState beliefs = (src.NextUint64() & 1)
                            ? RandomBeliefState(n, k, MixSeed(seed, 2))
                            : BeliefState::Uniform(n, k);
  std::unique_ptr<LinearVectorQuery> query =
      MakeRandomTableQuery(0, n, k, d, MixSeed(seed, 3));

  const std::vector<double> true_mean = QueryTrueMean(*query, dataset);
  const std::vector<double> belief_mean =
      QueryBeliefMean(*query, beliefs, dataset);
  const double gap = L2Distance(true_mean, belief_mean);
  if (gap < 1e-4) return std::nullopt;

  const double c = 3.0;
  // gap = 26 eta keeps item (i)'s threshold (2c^2 + 7) eta = 25 eta strict.
  const double eta = gap / 26.0;

  std::vector<double> v = true_mean;
  if (src.NextUint64() & 1) {
    // Perturb the estimate by 0.5 eta in a random direction; the report
    // below re-verifies that items (ii)-(iv) survived the perturbation.
    std::vector<double> direction(v.size());
    double norm2 = 0.0;
    for (double& x : direction) {
      x = src.NextGaussian();
      norm2 += x * x;
    }
    if (norm2 > 1e-24) {
      const double s = 0.5 * eta / std::sqrt(norm2);
      for (std::size_t j = 0; j < v.size(); ++j) v[j] += s * direction[j];
    }
  }
  const double iota = gap * (0.7 + 0.6 * src.NextUniform());

  const MwuParams params(eta, c);
  const Condition1Report report =
      CheckCondition1(beliefs, *query, v, iota, params, dataset);
  if (!report.AllHold()) return std::nullopt;

  return Condition1Case{std::move(dataset), std::move(query),
                        std::move(beliefs), std::move(v),
                        iota,               eta,
                        c};
}

Lemma6BatteryResult RunLemma6Battery(std::int64_t instances,
                                     std::uint64_t seed) {
  Lemma6BatteryResult result;
  NoiseSource shapes(seed, 0x6FA7);
  const std::int64_t max_attempts = instances * 50;
  while (result.verified < instances && result.attempted < max_attempts) {
    ++result.attempted;
    const std::int64_t n = 2 + static_cast<std::int64_t>(shapes.NextUint64() % 15);
    const int k = 2 + static_cast<int>(shapes.NextUint64() % 7);
    const int d = 1 + static_cast<int>(shapes.NextUint64() % 8);
    std::optional<Condition1Case> c1 = BuildCondition1Case(
        n, k, d, MixSeed(seed, static_cast<std::uint64_t>(result.attempted)));
    if (!c1.has_value()) continue;
    ++result.verified;
    const double before = Potential(c1->beliefs, c1->dataset);
    const BeliefState updated =
        MwuUpdate(c1->beliefs, *c1->query, c1->estimate, c1->iota,
                  MwuParams(c1->eta, c1->c), c1->dataset);
    const double drop = before - Potential(updated, c1->dataset);
    if (drop >= c1->eta * c1->eta) ++result.drops_ok;
  }
  return result;
}

UpdateSequenceResult RunUpdateBudgetSequence(std::int64_t n, int k, int d,
                                             double eta, std::uint64_t seed) {
  UpdateSequenceResult result;
  result.budget = std::log(static_cast<double>(k)) / (eta * eta);
  result.drops_ok = true;
  const double c = 3.0;
  const MwuParams params(eta, c);
  const Dataset dataset = RandomDataset(n, k, MixSeed(seed, 0xDA));
  BeliefState beliefs = BeliefState::Uniform(n, k);

  // Hard stop slightly past the theoretical budget; reaching it means the
  // bound failed.
  const std::int64_t cap = static_cast<std::int64_t>(result.budget) + 2;
  std::int64_t query_counter = 0;
  while (result.steps < cap) {
    bool found = false;
    for (int attempt = 0; attempt < 300 && !found; ++attempt) {
      ++query_counter;
      const std::unique_ptr<TableQuery> query = MakeRandomTableQuery(
          query_counter, n, k, d, MixSeed(seed, 0x9000 + query_counter));
      const std::vector<double> true_mean = QueryTrueMean(*query, dataset);
      const std::vector<double> belief_mean =
          QueryBeliefMean(*query, beliefs, dataset);
      const double gap = L2Distance(true_mean, belief_mean);
      if (gap < 25.5 * eta) continue;
      const std::vector<double>& v = true_mean;  // exact estimate
      const double iota = gap;
      if (!CheckCondition1(beliefs, *query, v, iota, params, dataset)
               .AllHold()) {
        continue;
      }
      const double before = Potential(beliefs, dataset);
      beliefs = MwuUpdate(beliefs, *query, v, iota, params, dataset);
      const double drop = before - Potential(beliefs, dataset);
      if (drop < eta * eta) result.drops_ok = false;
      ++result.steps;
      found = true;
    }
    if (!found) break;  // no query satisfies the condition: exhausted
  }
  result.within_budget = static_cast<double>(result.steps) < result.budget;
  return result;
}

OlvqTaskResult RunOlvqTask(std::int64_t n, int k, int d, double rho,
                           std::int64_t num_queries, double beta,
                           QueryFamily family, std::uint64_t seed,
                           const std::string& transcript_path,
                           bool transcript_errors) {
  const Dataset dataset = RandomDataset(n, k, MixSeed(seed, 0xA11));
  OlvqTaskResult result{DeriveConfig(rho, beta, num_queries, n, k), {}, 0.0,
                        0.0, 0, false, 0};
  PvmwSession session(dataset, result.config, MixSeed(seed, 0xB22));
  std::ofstream transcript;
  if (!transcript_path.empty()) {
    transcript.open(transcript_path);
    if (!transcript) {
      throw std::runtime_error("cannot write transcript: " + transcript_path);
    }
    session.EnableTranscript(&transcript, transcript_errors);
  }

  for (std::int64_t t = 0; t < num_queries; ++t) {
    const std::unique_ptr<LinearVectorQuery> query =
        MakeSweepQuery(family, t, n, k, d, MixSeed(seed, 0xF00 + t));
    // Exact value for the error measurement (experiment-side, not released).
    const std::vector<double> truth = QueryTrueMean(*query, dataset);
    const QueryAnswer answer = session.Answer(*query);
    if (answer.status == AnswerStatus::kFail) {
      result.failed = true;
      break;
    }
    result.per_query_error.push_back(L2Distance(*answer.estimate, truth));
  }
  if (!result.per_query_error.empty()) {
    result.max_error = *std::max_element(result.per_query_error.begin(),
                                         result.per_query_error.end());
    result.median_error = Median(result.per_query_error);
  }
  result.updates_consumed = session.update_count();
  result.clip_warnings = session.query_clip_warnings();
  return result;
}

double Median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m]
                                : 0.5 * (values[m - 1] + values[m]);
}

namespace {

std::vector<PrivacyPoint> PrivacyGrid(const ExperimentSpec& spec) {
  std::vector<PrivacyPoint> points;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!spec.epsilon_values.empty()) {
    for (double eps : spec.epsilon_values) {
      points.push_back({RhoForDpTarget(eps, spec.delta), eps, spec.delta});
    }
  } else if (!spec.rho_values.empty()) {
    for (double rho : spec.rho_values) points.push_back({rho, nan, nan});
  } else {
    points.push_back({1.0, nan, nan});
  }
  return points;
}

struct TaskOutput {
  std::string row;
  bool failed = false;
  std::string error;
};

// Runs tasks in a pool and emits rows in task order, so output is
// deterministic no matter how the pool schedules.
template <typename TaskFn>
std::vector<TaskOutput> RunPool(std::int64_t count, TaskFn&& fn) {
  std::vector<TaskOutput> outputs(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      outputs[static_cast<std::size_t>(i)] = fn(i);
    } catch (const std::exception& e) {
      outputs[static_cast<std::size_t>(i)].error = e.what();
    }
  }
  return outputs;
}

int EmitAndFinish(const ExperimentSpec& spec, const std::string& header,
                  const std::vector<TaskOutput>& outputs, std::ostream& out) {
  for (const TaskOutput& task : outputs) {
    if (!task.error.empty()) {
      std::cerr << "pvmw-dp: task failed: " << task.error << "\n";
      return 1;
    }
  }
  out << "# config_hash=" << spec.ConfigHash()
      << " command=" << CommandName(spec.command);
  if (spec.debug_nonprivate) out << " NONPRIVATE_DEBUG=1";
  out << "\n" << header << "\n";
  bool any_failed = false;
  for (const TaskOutput& task : outputs) {
    out << task.row;
    any_failed = any_failed || task.failed;
  }
  out.flush();
  if (!out) {
    std::cerr << "pvmw-dp: write error\n";
    return 1;
  }
  return any_failed ? 2 : 0;
}

int RunOlvqSweep(const ExperimentSpec& spec, std::ostream& out) {
  struct Task {
    std::int64_t n;
    int k;
    int d;
    PrivacyPoint privacy;
    std::uint64_t seed;
    std::int64_t index;
  };
  std::vector<Task> tasks;
  std::int64_t index = 0;
  for (std::int64_t n : spec.n_values) {
    for (int k : spec.k_values) {
      for (int d : spec.d_values) {
        for (const PrivacyPoint& p : PrivacyGrid(spec)) {
          for (std::uint64_t seed : spec.seeds) {
            tasks.push_back({n, k, d, p, seed, index++});
          }
        }
      }
    }
  }
  const std::string hash = spec.ConfigHash();
  const std::vector<TaskOutput> outputs = RunPool(
      static_cast<std::int64_t>(tasks.size()), [&](std::int64_t i) {
        const Task& task = tasks[static_cast<std::size_t>(i)];
        std::string transcript_path;
        if (!spec.transcript_dir.empty()) {
          transcript_path = spec.transcript_dir + "/transcript_" +
                            std::to_string(task.index) + ".jsonl";
        }
        const OlvqTaskResult r = RunOlvqTask(
            task.n, task.k, task.d, task.privacy.rho, spec.num_queries,
            spec.beta, spec.query_family, task.seed, transcript_path,
            spec.debug_nonprivate);
        // The gradient family ignores the d grid and lives in n*k dimensions.
        const std::int64_t effective_d =
            spec.query_family == QueryFamily::kGradient
                ? task.n * task.k
                : static_cast<std::int64_t>(task.d);
        std::ostringstream row;
        row << hash << "," << CommandName(spec.command) << "," << task.n << ","
            << task.k << "," << effective_d << "," << spec.num_queries << ","
            << FormatDouble(task.privacy.rho) << ","
            << OptionalNumber(task.privacy.epsilon) << ","
            << OptionalNumber(task.privacy.delta) << ","
            << FormatDouble(spec.beta) << "," << task.seed << ","
            << FormatDouble(r.config.eta) << "," << FormatDouble(r.config.tau)
            << "," << r.config.max_updates << ","
            << FormatDouble(r.config.sigma) << ","
            << FormatDouble(r.config.eps_prime) << ","
            << FormatDouble(TheoreticalAlpha(r.config)) << ","
            << (r.config.vacuous_guarantee() ? 1 : 0) << ","
            << r.updates_consumed << "," << (r.failed ? 1 : 0) << ","
            << FormatDouble(r.max_error) << "," << FormatDouble(r.median_error)
            << "," << r.clip_warnings << "\n";
        return TaskOutput{row.str(), r.failed, ""};
      });
  return EmitAndFinish(
      spec,
      "config_hash,command,n,k,d,T,rho,epsilon,delta,beta,seed,eta,tau,l_max,"
      "sigma,eps_prime,theoretical_alpha,vacuous_guarantee,updates_consumed,"
      "fail,max_error,median_error,clip_warnings",
      outputs, out);
}

int RunErmSweep(const ExperimentSpec& spec, std::ostream& out) {
  const bool strongly = spec.command == Command::kErmStronglyConvex;
  struct Task {
    std::int64_t n;
    int k;
    PrivacyPoint privacy;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::int64_t n : spec.n_values) {
    for (int k : spec.k_values) {
      for (const PrivacyPoint& p : PrivacyGrid(spec)) {
        for (std::uint64_t seed : spec.seeds) {
          tasks.push_back({n, k, p, seed});
        }
      }
    }
  }
  const std::string hash = spec.ConfigHash();
  const std::vector<TaskOutput> outputs = RunPool(
      static_cast<std::int64_t>(tasks.size()), [&](std::int64_t i) {
        const Task& task = tasks[static_cast<std::size_t>(i)];
        HardInstance instance =
            strongly ? HardInstanceStronglyConvex(task.n, task.k,
                                                  spec.lipschitz, spec.mu,
                                                  MixSeed(task.seed, 0xEC))
                     : HardInstanceConvex(task.n, task.k, spec.radius,
                                          spec.lipschitz,
                                          MixSeed(task.seed, 0xEC));
        SolveOptions options;
        options.seed = MixSeed(task.seed, 0xED);
        options.step_cap = spec.step_cap;
        if (spec.erm_steps > 0) options.steps = spec.erm_steps;
        std::vector<ErmProblem> problems;
        problems.push_back(std::move(instance.problem));
        const ErmReport report =
            strongly ? SolveStronglyConvex(problems, instance.dataset,
                                           task.privacy.rho, options)
                     : SolveConvex(problems, instance.dataset,
                                   task.privacy.rho, options);
        const ProblemResult& pr = report.problems.front();
        std::ostringstream row;
        row << hash << "," << CommandName(spec.command) << ",0," << task.n
            << "," << task.k << "," << task.n * task.k << ","
            << FormatDouble(task.privacy.rho) << ","
            << OptionalNumber(task.privacy.epsilon) << ","
            << OptionalNumber(task.privacy.delta) << "," << task.seed << ","
            << pr.steps_planned << "," << FormatDouble(report.eta) << ","
            << FormatDouble(pr.excess_risk_vs_reference) << ","
            << FormatDouble(report.theoretical_alpha) << ","
            << (report.vacuous_guarantee ? 1 : 0) << ","
            << (report.failed ? 1 : 0) << "\n";
        return TaskOutput{row.str(), report.failed, ""};
      });
  return EmitAndFinish(
      spec,
      "config_hash,command,problem_id,n,k,d,rho,epsilon,delta,seed,q,eta,"
      "excess_risk,theoretical_alpha,vacuous_guarantee,failed",
      outputs, out);
}

int RunVerifyLemma1(const ExperimentSpec& spec, std::ostream& out) {
  struct Task {
    double sigma_z;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double s : spec.sigma_z_values) {
    for (std::uint64_t seed : spec.seeds) tasks.push_back({s, seed});
  }
  const std::string hash = spec.ConfigHash();
  const std::vector<TaskOutput> outputs = RunPool(
      static_cast<std::int64_t>(tasks.size()), [&](std::int64_t i) {
        const Task& task = tasks[static_cast<std::size_t>(i)];
        NoiseSource gen(MixSeed(task.seed, 0x1E3), 7);
        const int d = spec.lemma1_dim;
        FiniteDistribution dist;
        dist.support.resize(static_cast<std::size_t>(spec.support_size));
        dist.probs.resize(dist.support.size());
        double total = 0.0;
        for (std::size_t s = 0; s < dist.support.size(); ++s) {
          dist.support[s].resize(static_cast<std::size_t>(d));
          FillUnitVector(gen, dist.support[s]);
          const double radius = gen.NextUniform();
          for (double& x : dist.support[s]) x *= radius;
          dist.probs[s] = 0.1 + gen.NextUniform();
          total += dist.probs[s];
        }
        for (double& p : dist.probs) p /= total;
        std::vector<double> mu_z(static_cast<std::size_t>(d));
        FillUnitVector(gen, mu_z);
        const double mu_norm = 2.0 * gen.NextUniform();
        for (double& x : mu_z) x *= mu_norm;

        NoiseSource mc(MixSeed(task.seed, 0x1E4), 8);
        const ClipConcentrationResult r = VerifyClipConcentration(
            dist, mu_z, task.sigma_z, spec.trials, mc);
        const double slack =
            3.0 * std::sqrt(r.bound / static_cast<double>(r.trials));
        const bool pass = r.failure_rate <= r.bound + slack;
        std::ostringstream row;
        row << hash << "," << CommandName(spec.command) << ","
            << FormatDouble(task.sigma_z) << "," << d << ","
            << spec.support_size << "," << r.trials << "," << task.seed << ","
            << FormatDouble(r.bound) << "," << FormatDouble(r.failure_rate)
            << "," << FormatDouble(slack) << "," << (pass ? 1 : 0) << "\n";
        return TaskOutput{row.str(), !pass, ""};
      });
  return EmitAndFinish(spec,
                       "config_hash,command,sigma_z,d,support,trials,seed,"
                       "bound,failure_rate,slack,pass",
                       outputs, out);
}

int RunMwuProps(const ExperimentSpec& spec, std::ostream& out) {
  const std::string hash = spec.ConfigHash();
  std::vector<TaskOutput> outputs(2);
  {
    const Lemma6BatteryResult r =
        RunLemma6Battery(spec.property_instances, spec.seeds.front());
    std::ostringstream row;
    row << hash << "," << CommandName(spec.command)
        << ",potential_drop,16,8,8," << r.verified << "," << r.verified << ","
        << r.drops_ok << "," << (r.Passed() ? 1 : 0) << "\n";
    outputs[0] = {row.str(), !r.Passed(), ""};
  }
  {
    const UpdateSequenceResult r = RunUpdateBudgetSequence(
        8, 8, 4, /*eta=*/0.008, spec.seeds.front());
    const bool pass = r.within_budget && r.drops_ok && r.steps > 0;
    std::ostringstream row;
    row << hash << "," << CommandName(spec.command) << ",update_budget,8,8,4,1,"
        << r.steps << "," << FormatDouble(r.budget) << "," << (pass ? 1 : 0)
        << "\n";
    outputs[1] = {row.str(), !pass, ""};
  }
  return EmitAndFinish(spec,
                       "config_hash,command,check,n,k,d,instances,measure,"
                       "reference,pass",
                       outputs, out);
}

int RunAudit(const ExperimentSpec& spec, std::ostream& out) {
  const std::int64_t n = spec.n_values.front();
  const int k = spec.k_values.front();
  const PrivacyPoint privacy = PrivacyGrid(spec).front();
  const Dataset dataset = RandomDataset(n, k, MixSeed(spec.seeds.front(), 0xA11));
  const PvmwConfig config =
      DeriveConfig(privacy.rho, spec.beta, spec.num_queries, n, k);
  PvmwSession session(dataset, config, MixSeed(spec.seeds.front(), 0xB22));
  out << "# config_hash=" << spec.ConfigHash()
      << " command=" << CommandName(spec.command) << "\n";
  session.ledger().WriteCsv(out);
  out.flush();
  return out ? 0 : 1;
}

}  // namespace

int Run(const ExperimentSpec& spec) {
  const std::vector<std::string> bad = spec.Validate();
  if (!bad.empty()) {
    std::cerr << "pvmw-dp: invalid spec fields:";
    for (const std::string& field : bad) std::cerr << " " << field;
    std::cerr << "\n";
    return 1;
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!spec.output_path.empty()) {
    file.open(spec.output_path, std::ios::binary);
    if (!file) {
      std::cerr << "pvmw-dp: cannot open output path: " << spec.output_path
                << "\n";
      return 1;
    }
    out = &file;
  }

  try {
    switch (spec.command) {
      case Command::kOlvqSweep: return RunOlvqSweep(spec, *out);
      case Command::kErmConvex:
      case Command::kErmStronglyConvex: return RunErmSweep(spec, *out);
      case Command::kVerifyLemma1: return RunVerifyLemma1(spec, *out);
      case Command::kMwuProps: return RunMwuProps(spec, *out);
      case Command::kAudit: return RunAudit(spec, *out);
    }
  } catch (const std::exception& e) {
    std::cerr << "pvmw-dp: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace semidp
