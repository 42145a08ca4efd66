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

#include "semidp/mwu.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "semidp/mechanisms.h"
#include "semidp/parallel.h"
#include "semidp/util.h"

namespace semidp {

MwuParams::MwuParams(double eta_in, double c_in) : eta(eta_in), c(c_in) {
  if (!(c > 0.0)) throw std::invalid_argument("MwuParams: c must be positive");
  if (!(eta > 0.0 && eta <= 1.0 / c)) {
    throw std::invalid_argument(
        "MwuParams: require 0 < eta <= 1/c; got eta=" + std::to_string(eta) +
        ", c=" + std::to_string(c));
  }
}

BeliefState MwuUpdateWithRates(const BeliefState& p, const LinearVectorQuery& f,
                               std::span<const double> v, double iota,
                               double eta, double c, const Dataset& data) {
  if (!(iota > 0.0)) {
    throw std::invalid_argument("MwuUpdate: iota must be positive");
  }
  if (p.rows() != data.size() || p.cols() != data.private_domain_size()) {
    throw std::invalid_argument("MwuUpdate: belief state shape mismatch");
  }
  if (static_cast<int>(v.size()) != f.dim()) {
    throw std::invalid_argument("MwuUpdate: estimate dimension mismatch");
  }

  const std::vector<double> belief_mean = QueryBeliefMean(f, p, data);
  std::vector<double> phi(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    phi[j] = (v[j] - belief_mean[j]) / iota;
  }

  const std::int64_t n = data.size();
  const int k = data.private_domain_size();
  const std::size_t d = static_cast<std::size_t>(f.dim());
  std::vector<double> next(static_cast<std::size_t>(n) * k);

  parallel::ParallelForBlocks(
      static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        std::vector<double> scratch(d);
        std::vector<double> exponents(static_cast<std::size_t>(k));
        for (std::size_t i = begin; i < end; ++i) {
          const Example& x = data.example(static_cast<std::int64_t>(i));
          const std::span<const double> row = p.row(static_cast<std::int64_t>(i));
          double max_exponent = -std::numeric_limits<double>::infinity();
          for (int y = 0; y < k; ++y) {
            const double inner =
                f.InnerProduct(x.public_payload, y, phi, scratch);
            exponents[y] = eta * Trunc(inner, c);
            if (row[y] > 0.0 && exponents[y] > max_exponent) {
              max_exponent = exponents[y];
            }
          }
          // Max-subtracted softmax; with |exponent| <= eta*c this is only a
          // guard for callers running far outside the analysis regime.
          double* out = next.data() + i * static_cast<std::size_t>(k);
          double denom = 0.0;
          for (int y = 0; y < k; ++y) {
            const double w =
                row[y] > 0.0 ? row[y] * std::exp(exponents[y] - max_exponent)
                             : 0.0;
            out[y] = w;
            denom += w;
          }
          for (int y = 0; y < k; ++y) out[y] /= denom;
        }
      });
  return BeliefState(n, k, std::move(next));
}

BeliefState MwuUpdate(const BeliefState& p, const LinearVectorQuery& f,
                      std::span<const double> v, double iota,
                      const MwuParams& params, const Dataset& data) {
  return MwuUpdateWithRates(p, f, v, iota, params.eta, params.c, data);
}

double Potential(const BeliefState& p, const Dataset& data) {
  if (p.rows() != data.size() || p.cols() != data.private_domain_size()) {
    throw std::invalid_argument("Potential: belief state shape mismatch");
  }
  const std::int64_t n = data.size();
  for (std::int64_t i = 0; i < n; ++i) {
    if (p.at(i, data.example(i).private_value) <= 0.0) {
      throw std::domain_error("potential diverged: zero belief on a true "
                              "private value (row " + std::to_string(i) + ")");
    }
  }
  const double sum = parallel::DeterministicScalarSum(
      static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
          const auto idx = static_cast<std::int64_t>(i);
          s += std::log(1.0 / p.at(idx, data.example(idx).private_value));
        }
        return s;
      });
  return sum / static_cast<double>(n);
}

namespace {

// Shared implementation: mean of clip_{phi,c}(f(.)) with optional belief
// weights.
std::vector<double> ClippedMeanImpl(const LinearVectorQuery& f,
                                    const Dataset& data, const BeliefState* p,
                                    std::span<const double> phi, double c) {
  if (static_cast<int>(phi.size()) != f.dim()) {
    throw std::invalid_argument("ClippedMean: phi dimension mismatch");
  }
  const auto n = static_cast<std::size_t>(data.size());
  const auto d = static_cast<std::size_t>(f.dim());
  const int k = data.private_domain_size();
  std::vector<double> out(d);
  parallel::DeterministicVectorSum(
      n, d, out, [&](std::size_t begin, std::size_t end, std::span<double> acc) {
        std::vector<double> scratch(d);
        for (std::size_t i = begin; i < end; ++i) {
          const Example& x = data.example(static_cast<std::int64_t>(i));
          if (p == nullptr) {
            const double inner = f.InnerProduct(x.public_payload,
                                                x.private_value, phi, scratch);
            f.AccumulateInto(x.public_payload, x.private_value,
                             ClipScale(inner, c), acc, scratch);
          } else {
            const std::span<const double> row =
                p->row(static_cast<std::int64_t>(i));
            for (int y = 0; y < k; ++y) {
              if (row[y] == 0.0) continue;
              const double inner =
                  f.InnerProduct(x.public_payload, y, phi, scratch);
              f.AccumulateInto(x.public_payload, y, row[y] * ClipScale(inner, c),
                               acc, scratch);
            }
          }
        }
      });
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& x : out) x *= inv_n;
  return out;
}

}  // namespace

std::vector<double> ClippedTrueMean(const LinearVectorQuery& f,
                                    const Dataset& data,
                                    std::span<const double> phi, double c) {
  return ClippedMeanImpl(f, data, nullptr, phi, c);
}

std::vector<double> ClippedBeliefMean(const LinearVectorQuery& f,
                                      const BeliefState& p, const Dataset& data,
                                      std::span<const double> phi, double c) {
  if (p.rows() != data.size() || p.cols() != data.private_domain_size()) {
    throw std::invalid_argument("ClippedBeliefMean: shape mismatch");
  }
  return ClippedMeanImpl(f, data, &p, phi, c);
}

Condition1Report CheckCondition1(const BeliefState& p_prev,
                                 const LinearVectorQuery& f,
                                 std::span<const double> v, double iota,
                                 const MwuParams& params, const Dataset& data) {
  const double eta = params.eta;
  const double c = params.c;
  const std::vector<double> true_mean = QueryTrueMean(f, data);
  const std::vector<double> belief_mean = QueryBeliefMean(f, p_prev, data);
  const std::size_t d = true_mean.size();

  const double gap = L2Distance(true_mean, belief_mean);

  // phi from the update rule: (v - f(p)) / iota.
  std::vector<double> phi(d), v_minus_belief(d), true_minus_v(d),
      belief_minus_true(d);
  for (std::size_t j = 0; j < d; ++j) {
    v_minus_belief[j] = v[j] - belief_mean[j];
    phi[j] = v_minus_belief[j] / iota;
    true_minus_v[j] = true_mean[j] - v[j];
    belief_minus_true[j] = belief_mean[j] - true_mean[j];
  }

  const std::vector<double> clipped_true = ClippedTrueMean(f, data, phi, c);
  const std::vector<double> clipped_belief =
      ClippedBeliefMean(f, p_prev, data, phi, c);

  std::vector<double> clip_shift_true(d), clip_shift_belief(d);
  for (std::size_t j = 0; j < d; ++j) {
    clip_shift_true[j] = clipped_true[j] - true_mean[j];
    clip_shift_belief[j] = clipped_belief[j] - belief_mean[j];
  }

  Condition1Report report;
  report.error_large = gap >= (2.0 * c * c + 7.0) * eta;
  report.noise_direction_small =
      DotProduct(true_minus_v, belief_minus_true) <= eta * gap;
  report.clip_error_true_small =
      std::abs(DotProduct(v_minus_belief, clip_shift_true)) <= eta * eta;
  report.clip_error_belief_small =
      std::abs(DotProduct(v_minus_belief, clip_shift_belief)) <= eta * eta;
  report.iota_at_least_eta = iota >= eta;
  report.iota_within_factor = iota <= 2.0 * gap;
  return report;
}

}  // namespace semidp
