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

#include "semidp/accountant.h"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "semidp/util.h"

namespace semidp {

namespace {
// Slack absorbing float rounding when a budget is split into many slots and
// recomposed.
constexpr double kBudgetSlack = 1e-9;
}  // namespace

ZcdpLedger::ZcdpLedger(double budget_rho) : budget_rho_(budget_rho) {
  if (!(budget_rho >= 0.0)) {
    throw std::invalid_argument("ZcdpLedger: budget must be nonnegative");
  }
}

void ZcdpLedger::Charge(std::string label, double rho) {
  if (!(rho >= 0.0)) {
    throw std::invalid_argument("ZcdpLedger: negative charge '" + label + "'");
  }
  CompensatedSum sum;
  for (const auto& c : charges_) sum.Add(c.rho);
  sum.Add(rho);
  if (sum.Total() > budget_rho_ * (1.0 + kBudgetSlack) + 1e-300) {
    throw std::runtime_error("ZcdpLedger: charge '" + label +
                             "' exceeds budget (" + FormatDouble(sum.Total()) +
                             " > " + FormatDouble(budget_rho_) + ")");
  }
  charges_.push_back({std::move(label), rho});
}

double ZcdpLedger::total() const {
  CompensatedSum sum;
  for (const auto& c : charges_) sum.Add(c.rho);
  return sum.Total();
}

void ZcdpLedger::WriteCsv(std::ostream& out) const {
  out << "label,rho,cumulative_rho\n";
  CompensatedSum sum;
  for (const auto& c : charges_) {
    sum.Add(c.rho);
    out << c.label << "," << FormatDouble(c.rho) << ","
        << FormatDouble(sum.Total()) << "\n";
  }
}

double Compose(std::span<const double> charges) {
  CompensatedSum sum;
  for (double rho : charges) {
    if (!(rho >= 0.0)) {
      throw std::invalid_argument("Compose: negative charge");
    }
    sum.Add(rho);
  }
  return sum.Total();
}

DpParams ZcdpToDp(double rho, double delta) {
  if (!(rho > 0.0)) throw std::invalid_argument("ZcdpToDp: rho must be > 0");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("ZcdpToDp: delta must be in (0, 1/2)");
  }
  return {rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta)), delta};
}

double DpToZcdp(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("DpToZcdp: epsilon must be > 0");
  }
  return 0.5 * epsilon * epsilon;
}

double RhoForDpTarget(double epsilon, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) {
    throw std::invalid_argument("RhoForDpTarget: delta must be in (0, 1/2)");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("RhoForDpTarget: epsilon must be > 0");
  }
  const double log_inv_delta = std::log(1.0 / delta);
  if (epsilon >= std::sqrt(log_inv_delta)) {
    Warn("RhoForDpTarget: epsilon=" + FormatDouble(epsilon) +
         " outside (0, sqrt(ln(1/delta)))=(0, " +
         FormatDouble(std::sqrt(log_inv_delta)) +
         "); the conversion still applies but the accuracy theorem's "
         "narrower range is violated");
  }
  return 0.1 * epsilon * epsilon / log_inv_delta;
}

DpParams GroupPrivacy(const DpParams& params, int r) {
  if (r < 1) throw std::invalid_argument("GroupPrivacy: r must be >= 1");
  if (params.epsilon < 0.0 || params.delta < 0.0 || params.delta >= 1.0) {
    throw std::invalid_argument("GroupPrivacy: invalid (epsilon, delta)");
  }
  if (r == 1) return params;
  if (params.epsilon == 0.0) {
    // Limit of (e^{r eps} - 1)/(e^eps - 1) as eps -> 0.
    return {0.0, static_cast<double>(r) * params.delta};
  }
  const double r_eps = static_cast<double>(r) * params.epsilon;
  if (r_eps > 700.0) {
    throw std::overflow_error(
        "GroupPrivacy: r*epsilon > 700 overflows exp(); reduce the group "
        "size or epsilon");
  }
  const double ratio = std::expm1(r_eps) / std::expm1(params.epsilon);
  return {r_eps, ratio * params.delta};
}

}  // namespace semidp
