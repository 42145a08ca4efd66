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

#ifndef SEMIDP_MECHANISMS_H_
#define SEMIDP_MECHANISMS_H_

#include <cstdint>
#include <span>
#include <vector>

#include "semidp/noise.h"

namespace semidp {

// b scaled so its absolute value is at most c: b * min{1, c/|b|}.
double Trunc(double b, double c);

// Scale factor min{1, c/|inner|}, with inner == 0 mapping to 1 (the vector is
// left unchanged). Magnitudes below 1e-300 are treated as zero so the ratio
// cannot overflow.
double ClipScale(double inner, double c);

// u scaled so its phi-semi-norm |<phi, u>| is at most c.
std::vector<double> Clip(std::span<const double> u, std::span<const double> phi,
                         double c);

// The AboveThreshold comparison: value + nu >= tau + chi. Pure, no sampling.
bool AboveThresholdStep(double noisy_query_value, double tau, double chi,
                        double nu);

// Tail bounds: P[|Lap(a)| >= t] <= 2exp(-t/a) and
// P[|N(0, sigma^2)| >= t] <= 2exp(-(t/sigma)^2 / 2).
double LaplaceTailBound(double t, double scale);
double GaussianTailBound(double t, double sigma);

// Finite distribution over the d-dimensional unit ball.
struct FiniteDistribution {
  std::vector<std::vector<double>> support;
  std::vector<double> probs;

  // Throws unless probs are nonnegative, sum to 1 (1e-9), and every support
  // point lies in the unit ball.
  void Validate() const;
  std::vector<double> Mean() const;
};

struct ClipConcentrationResult {
  double failure_rate = 0.0;
  double bound = 0.0;
  std::int64_t trials = 0;
};

// Monte-Carlo check of the clipped-mean concentration bound: draws
// Z ~ N(mu_z, sigma_z^2 I_d), computes |<Z, E_U[clip_{Z,3}(U)] - mu_P>|
// exactly over the finite support, and reports the fraction of trials
// exceeding 2exp(-0.1/sigma_z^2) together with that bound.
ClipConcentrationResult VerifyClipConcentration(const FiniteDistribution& p,
                                                std::span<const double> mu_z,
                                                double sigma_z,
                                                std::int64_t trials,
                                                NoiseSource& src);

}  // namespace semidp

#endif  // SEMIDP_MECHANISMS_H_
