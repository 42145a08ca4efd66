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

#include "semidp/mechanisms.h"

#include <cmath>
#include <stdexcept>

#include "semidp/util.h"

namespace semidp {

double Trunc(double b, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("Trunc: c must be positive");
  const double mag = std::abs(b);
  return mag <= c ? b : (b < 0.0 ? -c : c);
}

double ClipScale(double inner, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("ClipScale: c must be positive");
  const double mag = std::abs(inner);
  if (mag < 1e-300) return 1.0;
  const double ratio = c / mag;
  return ratio < 1.0 ? ratio : 1.0;
}

std::vector<double> Clip(std::span<const double> u,
                         std::span<const double> phi, double c) {
  if (u.size() != phi.size()) {
    throw std::invalid_argument("Clip: dimension mismatch");
  }
  const double scale = ClipScale(DotProduct(phi, u), c);
  std::vector<double> out(u.begin(), u.end());
  if (scale != 1.0) {
    for (double& x : out) x *= scale;
  }
  return out;
}

bool AboveThresholdStep(double noisy_query_value, double tau, double chi,
                        double nu) {
  return noisy_query_value + nu >= tau + chi;
}

double LaplaceTailBound(double t, double scale) {
  return 2.0 * std::exp(-t / scale);
}

double GaussianTailBound(double t, double sigma) {
  const double z = t / sigma;
  return 2.0 * std::exp(-0.5 * z * z);
}

void FiniteDistribution::Validate() const {
  if (support.empty() || support.size() != probs.size()) {
    throw std::invalid_argument("FiniteDistribution: shape mismatch");
  }
  const std::size_t dim = support.front().size();
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) {
      throw std::invalid_argument("FiniteDistribution: negative probability");
    }
    if (support[i].size() != dim) {
      throw std::invalid_argument("FiniteDistribution: ragged support");
    }
    if (SquaredL2Norm(support[i]) > 1.0 + 1e-9) {
      throw std::invalid_argument(
          "FiniteDistribution: support point outside the unit ball");
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("FiniteDistribution: probabilities sum to " +
                                std::to_string(total));
  }
}

std::vector<double> FiniteDistribution::Mean() const {
  const std::size_t dim = support.front().size();
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += probs[i] * support[i][j];
  }
  return mean;
}

ClipConcentrationResult VerifyClipConcentration(const FiniteDistribution& p,
                                                std::span<const double> mu_z,
                                                double sigma_z,
                                                std::int64_t trials,
                                                NoiseSource& src) {
  p.Validate();
  if (!(sigma_z > 0.0 && sigma_z <= 1.0)) {
    throw std::invalid_argument("VerifyClipConcentration: sigma_z not in (0,1]");
  }
  if (trials < 10000) {
    throw std::invalid_argument(
        "VerifyClipConcentration: need at least 1e4 trials");
  }
  const std::size_t dim = p.support.front().size();
  if (mu_z.size() != dim) {
    throw std::invalid_argument("VerifyClipConcentration: mu_z dim mismatch");
  }
  if (L2Norm(mu_z) > 2.0 + 1e-9) {
    throw std::invalid_argument("VerifyClipConcentration: ||mu_z|| > 2");
  }

  const double bound = 2.0 * std::exp(-0.1 / (sigma_z * sigma_z));
  const std::vector<double> mean = p.Mean();
  std::vector<double> z(dim);
  std::int64_t failures = 0;
  for (std::int64_t t = 0; t < trials; ++t) {
    for (std::size_t j = 0; j < dim; ++j) {
      z[j] = mu_z[j] + sigma_z * src.NextGaussian();
    }
    // <Z, E_U[clip_{Z,3}(U)] - mu_P> over the finite support, exactly.
    double inner = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
      const double zu = DotProduct(z, p.support[i]);
      inner += p.probs[i] * (ClipScale(zu, 3.0) * zu - zu);
    }
    if (std::abs(inner) > bound) ++failures;
  }
  return {static_cast<double>(failures) / static_cast<double>(trials), bound,
          trials};
}

}  // namespace semidp
