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

#ifndef SEMIDP_MWU_H_
#define SEMIDP_MWU_H_

#include <span>
#include <vector>

#include "semidp/core.h"

namespace semidp {

// Learning rate and truncation bound for the multiplicative weight update.
// Construction enforces eta <= 1/c, the standing premise of the potential
// analysis.
struct MwuParams {
  MwuParams(double eta, double c);
  double eta;
  double c;
};

// One truncated multiplicative weight update:
//   phi = (v - f(p; D)) / iota
//   p'_i(y) ∝ p_i(y) * exp(eta * trunc_c(<phi, f(x_i^pub, y)>))
// rows renormalized. The input state is not modified. Rows are processed in
// parallel; each row's arithmetic order is fixed, so the result does not
// depend on the thread count.
BeliefState MwuUpdate(const BeliefState& p, const LinearVectorQuery& f,
                      std::span<const double> v, double iota,
                      const MwuParams& params, const Dataset& data);

// Same update with raw rates; used by the query-answering session, which may
// run with learning rates outside the eta <= 1/c analysis premise (where the
// accuracy guarantee is vacuous but the mechanism still operates).
BeliefState MwuUpdateWithRates(const BeliefState& p, const LinearVectorQuery& f,
                               std::span<const double> v, double iota,
                               double eta, double c, const Dataset& data);

// Average negative log-likelihood of the true private values:
//   (1/n) sum_i ln(1 / p_i(x_i^priv)).
// Throws "potential diverged" if some true value has zero probability.
double Potential(const BeliefState& p, const Dataset& data);

// Means of clip_{phi,c}(f(.)), plain and belief-weighted.
std::vector<double> ClippedTrueMean(const LinearVectorQuery& f,
                                    const Dataset& data,
                                    std::span<const double> phi, double c);
std::vector<double> ClippedBeliefMean(const LinearVectorQuery& f,
                                      const BeliefState& p, const Dataset& data,
                                      std::span<const double> phi, double c);

// The six inequalities under which one update provably decreases the
// potential by eta^2. Test support only: items (i)-(iv) touch f(D) exactly,
// so this must never run on the private path.
struct Condition1Report {
  bool error_large = false;         // (i)   ||f(D)-f(p)|| >= (2c^2+7) eta
  bool noise_direction_small = false;  // (ii)
  bool clip_error_true_small = false;  // (iii)
  bool clip_error_belief_small = false;  // (iv)
  bool iota_at_least_eta = false;   // (v)
  bool iota_within_factor = false;  // (vi)  iota <= 2 ||f(D)-f(p)||

  bool AllHold() const {
    return error_large && noise_direction_small && clip_error_true_small &&
           clip_error_belief_small && iota_at_least_eta && iota_within_factor;
  }
};

Condition1Report CheckCondition1(const BeliefState& p_prev,
                                 const LinearVectorQuery& f,
                                 std::span<const double> v, double iota,
                                 const MwuParams& params, const Dataset& data);

}  // namespace semidp

#endif  // SEMIDP_MWU_H_
