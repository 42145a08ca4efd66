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

#ifndef SEMIDP_PVMW_H_
#define SEMIDP_PVMW_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "semidp/accountant.h"
#include "semidp/core.h"
#include "semidp/noise.h"

namespace semidp {

// All derived parameters of a private query-answering session. The four
// identities
//   tau = 16 eta
//   max_updates = 1 + floor(ln k / eta^2)
//   sigma = sqrt(2 max_updates / ((1 - zeta) rho))
//   eps_prime = sqrt(zeta rho / max_updates)
// are re-derived from (rho, zeta, eta, k) and asserted at construction.
struct PvmwConfig {
  double rho = 0.0;            // zCDP budget
  double beta = 0.0;           // failure probability, in (0, 1/2)
  std::int64_t max_queries = 0;  // T
  double zeta = 0.5;           // budget split
  double trunc_bound = 3.0;    // c
  double eta = 0.0;            // learning rate
  double tau = 0.0;            // accuracy threshold, 16 eta
  std::int64_t max_updates = 0;  // L_max
  double sigma = 0.0;          // Gaussian noise multiplier
  double eps_prime = 0.0;      // AboveThreshold / norm-estimation budget
  std::int64_t n = 0;
  int k = 0;

  // True when eta is above the regime where the accuracy bound says anything
  // (the bound 18*eta exceeds any unit-ball error); the session runs anyway.
  bool vacuous_guarantee() const { return eta > 0.1; }

  // Derives (tau, max_updates, sigma, eps_prime) from an explicitly chosen
  // eta. Used by tests and harnesses that pin the learning rate.
  static PvmwConfig FromEta(double rho, double beta, std::int64_t max_queries,
                            std::int64_t n, int k, double eta,
                            double zeta = 0.5, double trunc_bound = 3.0);

  // Throws unless the four identities and basic ranges hold.
  void Validate() const;
};

// The implicit lower bound on eta from the utility analysis:
//   1000 * (ln k / rho)^{1/4} * sqrt(ln(n T ln k / (rho beta eta))) / sqrt(n),
// clamped to 0 where the log argument drops below 1. Decreasing in eta.
double EtaLowerBound(double eta, double rho, double beta, std::int64_t T,
                     std::int64_t n, int k);

// Solves for the smallest eta exceeding EtaLowerBound by bisection on
// [1e-12, 1e6] (200 iterations, upper end returned) and fills in the derived
// parameters. Warns when rho is outside (0, 1) or when the resulting eta
// lands in the vacuous regime (eta > 0.1). Throws if there is no crossing
// below 1e6.
PvmwConfig DeriveConfig(double rho, double beta, std::int64_t max_queries,
                        std::int64_t n, int k, double zeta = 0.5,
                        double trunc_bound = 3.0);

// The concrete per-answer accuracy constant from the analysis: 18 eta.
double TheoreticalAlpha(const PvmwConfig& config);

enum class SessionStatus { kActive, kFailed, kExhausted };

enum class NoiseRole : std::uint8_t {
  kThreshold = 0,  // chi
  kQuery = 1,      // nu
  kNormEstimate = 2,  // xi
  kGaussian = 3,   // z
};

struct NoiseDrawRecord {
  NoiseRole role;
  double scale;
  std::int64_t count;  // coordinates drawn (1 for scalars)
};

// Interactive Private Vector Multiplicative Weight session.
//
// Answers an online stream of linear vector queries over a fixed dataset by
// maintaining per-example beliefs over the private values. Each answer is a
// function of the beliefs only; the dataset's private values are read only
// through the three noisy primitives (threshold test, norm estimate,
// Gaussian-perturbed true answer). Answer() calls are strictly sequential.
class PvmwSession {
 public:
  // Charges the full worst-case composition (all max_updates slots) to the
  // ledger up front and draws the initial threshold noise.
  PvmwSession(const Dataset& data, const PvmwConfig& config,
              std::uint64_t seed);

  // One round of the protocol: repeatedly runs the noisy threshold test,
  // applying a multiplicative weight update and re-testing the same query
  // while the test reports a large error. Returns the belief-state estimate
  // once the test passes, or FAIL (permanently poisoning the session) when a
  // required update would exhaust the update budget.
  QueryAnswer Answer(const LinearVectorQuery& f);

  SessionStatus status() const { return status_; }
  std::int64_t update_count() const { return update_count_; }
  std::int64_t answered_queries() const { return answered_queries_; }
  const BeliefState& beliefs() const { return beliefs_; }
  const PvmwConfig& config() const { return config_; }
  const ZcdpLedger& ledger() const { return ledger_; }
  const Dataset& dataset() const { return data_; }
  double threshold_noise() const { return chi_; }
  std::int64_t query_clip_warnings() const { return clip_warnings_; }

  // Scales recorded alongside every noise draw, for wiring audits.
  const std::vector<NoiseDrawRecord>& noise_trace() const {
    return noise_trace_;
  }

  // Optional JSON-lines transcript, one record per answer. error_vs_truth is
  // only written when include_error_vs_truth (non-private debug mode) is set.
  void EnableTranscript(std::ostream* out, bool include_error_vs_truth);

 private:
  double DrawLaplace(NoiseRole role, double scale);

  const Dataset& data_;
  PvmwConfig config_;
  BeliefState beliefs_;
  ZcdpLedger ledger_;
  NoiseSource threshold_noise_src_;
  NoiseSource query_noise_src_;
  NoiseSource norm_noise_src_;
  NoiseSource gaussian_src_;
  double chi_ = 0.0;
  std::int64_t update_count_ = 0;
  std::int64_t answered_queries_ = 0;
  std::int64_t clip_warnings_ = 0;
  SessionStatus status_ = SessionStatus::kActive;
  std::vector<NoiseDrawRecord> noise_trace_;
  std::ostream* transcript_ = nullptr;
  bool transcript_errors_ = false;
};

}  // namespace semidp

#endif  // SEMIDP_PVMW_H_
