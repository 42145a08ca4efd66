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

// Experiment CLI. Configuration comes from an optional key=value file plus
// flags; flags win. CSV schemas are documented in docs/schema.md.
//
//   pvmw-dp <command> [--config file] [--n ...] [--k ...] [--rho ...]
//           [--eps ... --delta ...] [--seeds ...] [--out csv]
//           [--debug-nonprivate]
//
// Exit codes: 0 success, 2 when any session FAILed, 1 on usage errors.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "semidp/harness.h"

int main(int argc, char** argv) {
  CLI::App app{"Semi-sensitive DP linear vector queries and ERM experiments"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  semidp::ExperimentSpec spec;
  std::string family_name = "RANDOM_TABLE";

  app.add_option("--n", spec.n_values, "Dataset sizes to sweep");
  app.add_option("--k", spec.k_values, "Private domain sizes");
  app.add_option("--d", spec.d_values, "Query output dimensions");
  app.add_option("--rho", spec.rho_values, "zCDP budgets");
  app.add_option("--eps", spec.epsilon_values,
                 "DP epsilon targets (converted to rho)");
  app.add_option("--delta", spec.delta, "DP delta shared by all epsilons");
  app.add_option("--seeds", spec.seeds, "Distinct run seeds");
  app.add_option("--T", spec.num_queries, "Queries per session");
  app.add_option("--beta", spec.beta, "Failure probability");
  app.add_option("--family", family_name,
                 "Query family: RANDOM_TABLE | GRADIENT | CONSTANT_PUBLIC");
  app.add_option("--q", spec.erm_steps, "Gradient steps per problem");
  app.add_option("--step-cap", spec.step_cap,
                 "Cap on the default q = min(n^2, cap)");
  app.add_option("--lipschitz", spec.lipschitz, "Lipschitz constant G");
  app.add_option("--radius", spec.radius, "Feasible ball radius R");
  app.add_option("--mu", spec.mu, "Strong convexity constant");
  app.add_option("--trials", spec.trials, "Monte-Carlo trials");
  app.add_option("--sigma-z", spec.sigma_z_values,
                 "Gaussian widths for the clip concentration check");
  app.add_option("--support", spec.support_size,
                 "Support size of the random finite distribution");
  app.add_option("--lemma1-dim", spec.lemma1_dim,
                 "Dimension for the clip concentration check");
  app.add_option("--instances", spec.property_instances,
                 "Instances for the property batteries");
  app.add_option("--out", spec.output_path, "Output CSV path (default stdout)");
  app.add_option("--transcript-dir", spec.transcript_dir,
                 "Directory for per-session JSONL transcripts");
  app.add_flag("--debug-nonprivate", spec.debug_nonprivate,
               "Emit non-private debug output (marks the CSV header)");

  const std::vector<std::string> command_names = {
      "olvq-sweep",    "erm-convex", "erm-strongly-convex",
      "verify-lemma1", "mwu-props",  "audit"};
  for (const std::string& name : command_names) {
    app.add_subcommand(name)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const auto command = semidp::ParseCommand(sub->get_name());
  if (!command.has_value()) {
    std::cerr << "pvmw-dp: unknown command " << sub->get_name() << "\n";
    return 1;
  }
  spec.command = *command;
  const auto family = semidp::ParseQueryFamily(family_name);
  if (!family.has_value()) {
    std::cerr << "pvmw-dp: unknown query family " << family_name << "\n";
    return 1;
  }
  spec.query_family = *family;
  return semidp::Run(spec);
}
