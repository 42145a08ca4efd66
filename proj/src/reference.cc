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

#include "semidp/reference.h"

#include <cmath>

#include "semidp/mechanisms.h"
#include "semidp/util.h"

namespace semidp {
namespace reference {

namespace {

// Same unit-ball safeguard rule as the production kernels, applied inline.
void RescaleToUnitBall(std::vector<double>& v) {
  const double norm2 = SquaredL2Norm(v);
  if (norm2 > 1.0 + 1e-9) {
    const double s = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= s;
  }
}

std::vector<double> EvalSafe(const LinearVectorQuery& f,
                             const PublicPayload& pub, int y) {
  std::vector<double> value(static_cast<std::size_t>(f.dim()));
  f.Eval(pub, y, value);
  RescaleToUnitBall(value);
  return value;
}

}  // namespace

std::vector<double> QueryTrueMean(const LinearVectorQuery& f,
                                  const Dataset& data) {
  const std::size_t d = static_cast<std::size_t>(f.dim());
  std::vector<double> sum(d, 0.0);
  for (std::int64_t i = 0; i < data.size(); ++i) {
    const Example& x = data.example(i);
    const std::vector<double> value =
        EvalSafe(f, x.public_payload, x.private_value);
    for (std::size_t j = 0; j < d; ++j) sum[j] += value[j];
  }
  for (double& s : sum) s /= static_cast<double>(data.size());
  return sum;
}

std::vector<double> QueryBeliefMean(const LinearVectorQuery& f,
                                    const BeliefState& p, const Dataset& data) {
  const std::size_t d = static_cast<std::size_t>(f.dim());
  std::vector<double> sum(d, 0.0);
  for (std::int64_t i = 0; i < data.size(); ++i) {
    const Example& x = data.example(i);
    for (int y = 0; y < data.private_domain_size(); ++y) {
      const std::vector<double> value = EvalSafe(f, x.public_payload, y);
      for (std::size_t j = 0; j < d; ++j) sum[j] += p.at(i, y) * value[j];
    }
  }
  for (double& s : sum) s /= static_cast<double>(data.size());
  return sum;
}

std::vector<double> ClippedTrueMean(const LinearVectorQuery& f,
                                    const Dataset& data,
                                    std::span<const double> phi, double c) {
  const std::size_t d = static_cast<std::size_t>(f.dim());
  std::vector<double> sum(d, 0.0);
  for (std::int64_t i = 0; i < data.size(); ++i) {
    const Example& x = data.example(i);
    const std::vector<double> value =
        EvalSafe(f, x.public_payload, x.private_value);
    const std::vector<double> clipped = Clip(value, phi, c);
    for (std::size_t j = 0; j < d; ++j) sum[j] += clipped[j];
  }
  for (double& s : sum) s /= static_cast<double>(data.size());
  return sum;
}

std::vector<double> ClippedBeliefMean(const LinearVectorQuery& f,
                                      const BeliefState& p, const Dataset& data,
                                      std::span<const double> phi, double c) {
  const std::size_t d = static_cast<std::size_t>(f.dim());
  std::vector<double> sum(d, 0.0);
  for (std::int64_t i = 0; i < data.size(); ++i) {
    const Example& x = data.example(i);
    for (int y = 0; y < data.private_domain_size(); ++y) {
      const std::vector<double> value = EvalSafe(f, x.public_payload, y);
      const std::vector<double> clipped = Clip(value, phi, c);
      for (std::size_t j = 0; j < d; ++j) sum[j] += p.at(i, y) * clipped[j];
    }
  }
  for (double& s : sum) s /= static_cast<double>(data.size());
  return sum;
}

BeliefState MwuUpdate(const BeliefState& p, const LinearVectorQuery& f,
                      std::span<const double> v, double iota, double eta,
                      double c, const Dataset& data) {
  const std::vector<double> belief_mean = reference::QueryBeliefMean(f, p, data);
  std::vector<double> phi(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    phi[j] = (v[j] - belief_mean[j]) / iota;
  }
  const std::int64_t n = data.size();
  const int k = data.private_domain_size();
  std::vector<double> next(static_cast<std::size_t>(n) * k, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const Example& x = data.example(i);
    double denom = 0.0;
    for (int y = 0; y < k; ++y) {
      const std::vector<double> value = EvalSafe(f, x.public_payload, y);
      const double w =
          p.at(i, y) * std::exp(eta * Trunc(DotProduct(phi, value), c));
      next[static_cast<std::size_t>(i) * k + y] = w;
      denom += w;
    }
    for (int y = 0; y < k; ++y) {
      next[static_cast<std::size_t>(i) * k + y] /= denom;
    }
  }
  return BeliefState(n, k, std::move(next));
}

double Potential(const BeliefState& p, const Dataset& data) {
  double sum = 0.0;
  for (std::int64_t i = 0; i < data.size(); ++i) {
    sum += std::log(1.0 / p.at(i, data.example(i).private_value));
  }
  return sum / static_cast<double>(data.size());
}

}  // namespace reference
}  // namespace semidp
