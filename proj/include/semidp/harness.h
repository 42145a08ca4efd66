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

#ifndef SEMIDP_HARNESS_H_
#define SEMIDP_HARNESS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semidp/core.h"
#include "semidp/mwu.h"
#include "semidp/pvmw.h"

namespace semidp {

enum class Command {
  kOlvqSweep,
  kErmConvex,
  kErmStronglyConvex,
  kVerifyLemma1,
  kMwuProps,
  kAudit,
};

enum class QueryFamily { kRandomTable, kGradient, kConstantPublic };

std::optional<Command> ParseCommand(const std::string& name);
std::optional<QueryFamily> ParseQueryFamily(const std::string& name);
std::string CommandName(Command command);
std::string QueryFamilyName(QueryFamily family);

// One experiment run: a command plus the grid it sweeps. Runs are
// deterministic given the spec (seeds included), and every CSV row carries
// the hash of the canonical spec string for replay.
struct ExperimentSpec {
  Command command = Command::kOlvqSweep;
  std::vector<std::int64_t> n_values{1024};
  std::vector<int> k_values{16};
  std::vector<int> d_values{32};
  std::vector<double> rho_values;      // direct zCDP budgets
  std::vector<double> epsilon_values;  // converted via the 0.1 eps^2 rule
  double delta = 1e-6;                 // shared by all epsilon values
  std::vector<std::uint64_t> seeds{1};
  std::int64_t num_queries = 64;  // T per OLVQ session
  QueryFamily query_family = QueryFamily::kRandomTable;
  std::string output_path;  // empty = stdout
  bool debug_nonprivate = false;
  std::string transcript_dir;  // when set, one JSONL transcript per task
  double beta = 0.1;
  std::int64_t erm_steps = 0;  // 0 = solver default
  std::int64_t step_cap = 100000;
  double lipschitz = 1.0;
  double radius = 1.0;
  double mu = 1.0;
  // verify-lemma1 knobs
  std::int64_t trials = 100000;
  std::vector<double> sigma_z_values{0.1, 0.15, 0.2};
  int support_size = 32;
  int lemma1_dim = 16;
  // mwu-props knobs
  std::int64_t property_instances = 500;

  // Names of invalid fields; empty when the spec is runnable.
  std::vector<std::string> Validate() const;
  // Canonical serialization; equal specs hash equally.
  std::string CanonicalString() const;
  std::string ConfigHash() const;
};

// Executes the experiment and writes its CSV artifact.
// Exit codes: 0 success, 2 when any session FAILed, 1 on usage/IO errors
// (invalid fields are listed by name on stderr).
int Run(const ExperimentSpec& spec);

// Built-in query families for the OLVQ sweep. Deterministic in
// (family, t, n, k, d, seed) and independent of threading.
//   kRandomTable:     a fixed random unit vector per (t, public index, y)
//   kConstantPublic:  a unit vector per (t, public index), shared by all y
//   kGradient:        the coordinate-indicator gradient query (d = n*k)
std::unique_ptr<LinearVectorQuery> MakeSweepQuery(QueryFamily family,
                                                  std::int64_t t,
                                                  std::int64_t n, int k, int d,
                                                  std::uint64_t seed);

// Random row-stochastic beliefs (positive entries), for property tests.
BeliefState RandomBeliefState(std::int64_t n, int k, std::uint64_t seed);

// A randomized instance constructed to satisfy all six items of the
// potential-decrease condition, verified via CheckCondition1 before being
// returned; nullopt when the draw failed the verification.
struct Condition1Case {
  Dataset dataset;
  std::unique_ptr<LinearVectorQuery> query;
  BeliefState beliefs;
  std::vector<double> estimate;  // v
  double iota = 0.0;
  double eta = 0.0;
  double c = 3.0;
};
std::optional<Condition1Case> BuildCondition1Case(std::int64_t n, int k, int d,
                                                  std::uint64_t seed);

// Potential-decrease battery: builds verified cases until `instances` of
// them exist (bounded attempts) and checks the eta^2 potential drop on each.
struct Lemma6BatteryResult {
  std::int64_t attempted = 0;
  std::int64_t verified = 0;
  std::int64_t drops_ok = 0;
  bool Passed() const { return verified > 0 && drops_ok == verified; }
};
Lemma6BatteryResult RunLemma6Battery(std::int64_t instances,
                                     std::uint64_t seed);

// Update-budget battery: runs a maximal sequence of verified condition
// updates with a fixed learning rate from uniform beliefs and checks it
// exhausts in fewer than ln(k)/eta^2 steps.
struct UpdateSequenceResult {
  std::int64_t steps = 0;
  double budget = 0.0;  // ln(k)/eta^2
  bool within_budget = false;
  bool drops_ok = false;
};
UpdateSequenceResult RunUpdateBudgetSequence(std::int64_t n, int k, int d,
                                             double eta, std::uint64_t seed);

// One OLVQ grid task; exposed for the acceptance suite.
struct OlvqTaskResult {
  PvmwConfig config;
  std::vector<double> per_query_error;  // vs the exact means (measurement)
  double max_error = 0.0;
  double median_error = 0.0;
  std::int64_t updates_consumed = 0;
  bool failed = false;
  std::int64_t clip_warnings = 0;
};
OlvqTaskResult RunOlvqTask(std::int64_t n, int k, int d, double rho,
                           std::int64_t num_queries, double beta,
                           QueryFamily family, std::uint64_t seed,
                           const std::string& transcript_path = "",
                           bool transcript_errors = false);

double Median(std::vector<double> values);

}  // namespace semidp

#endif  // SEMIDP_HARNESS_H_
