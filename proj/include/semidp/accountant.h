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

#ifndef SEMIDP_ACCOUNTANT_H_
#define SEMIDP_ACCOUNTANT_H_

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace semidp {

struct DpParams {
  double epsilon = 0.0;
  double delta = 0.0;  // in [0, 1)
};

// zCDP budget ledger. Charges compose additively; exceeding the budget is an
// error. Labels attribute each charge to a primitive for the audit report.
// This is a ledger, not an enforcement proxy: the session charges all of its
// worst-case composition up front.
class ZcdpLedger {
 public:
  struct Charge {
    std::string label;
    double rho;
  };

  explicit ZcdpLedger(double budget_rho);

  void Charge(std::string label, double rho);
  double total() const;
  double budget() const { return budget_rho_; }
  std::span<const struct Charge> charges() const { return charges_; }

  // CSV: label,rho,cumulative_rho
  void WriteCsv(std::ostream& out) const;

 private:
  double budget_rho_;
  std::vector<struct Charge> charges_;
};

// Sum of zCDP charges (compensated); throws on a negative charge.
double Compose(std::span<const double> charges);

// rho-zCDP to (rho + 2 sqrt(rho ln(1/delta)), delta)-DP, delta in (0, 1/2).
DpParams ZcdpToDp(double rho, double delta);

// epsilon-DP to (0.5 epsilon^2)-zCDP.
double DpToZcdp(double epsilon);

// Budget for an (epsilon, delta) target: rho = 0.1 epsilon^2 / ln(1/delta).
// Warns (does not fail) when epsilon is outside (0, sqrt(ln(1/delta))).
double RhoForDpTarget(double epsilon, double delta);

// (epsilon, delta) under r-step neighbor chains:
// (r epsilon, (e^{r epsilon} - 1)/(e^epsilon - 1) * delta). r = 1 is the
// identity; epsilon = 0 uses the limit ratio r.
DpParams GroupPrivacy(const DpParams& params, int r);

}  // namespace semidp

#endif  // SEMIDP_ACCOUNTANT_H_
