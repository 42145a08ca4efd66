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

#ifndef SEMIDP_REFERENCE_H_
#define SEMIDP_REFERENCE_H_

#include <span>
#include <vector>

#include "semidp/core.h"

namespace semidp {
namespace reference {

// Serial, straight-loop implementations of the kernels, written without the
// blocked reductions, fast paths, or softmax stabilization of the production
// versions. Tests use them as independent oracles and the benchmark compares
// against them. They only ever call the dense Eval() path.

std::vector<double> QueryTrueMean(const LinearVectorQuery& f,
                                  const Dataset& data);

std::vector<double> QueryBeliefMean(const LinearVectorQuery& f,
                                    const BeliefState& p, const Dataset& data);

std::vector<double> ClippedTrueMean(const LinearVectorQuery& f,
                                    const Dataset& data,
                                    std::span<const double> phi, double c);

std::vector<double> ClippedBeliefMean(const LinearVectorQuery& f,
                                      const BeliefState& p, const Dataset& data,
                                      std::span<const double> phi, double c);

// Textbook multiplicative weight update: direct exp() ratios per row.
BeliefState MwuUpdate(const BeliefState& p, const LinearVectorQuery& f,
                      std::span<const double> v, double iota, double eta,
                      double c, const Dataset& data);

double Potential(const BeliefState& p, const Dataset& data);

}  // namespace reference
}  // namespace semidp

#endif  // SEMIDP_REFERENCE_H_
