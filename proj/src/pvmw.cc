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

#include "semidp/pvmw.h"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "semidp/mechanisms.h"
#include "semidp/mwu.h"
#include "semidp/util.h"

namespace semidp {

namespace {

constexpr double kIdentityTol = 1e-12;
// Guard for the norm-estimate noise turning the estimate nonpositive, which
// the update rule cannot accept. Makes phi large; the truncation bound keeps
// the exponents finite.
constexpr double kIotaFloor = 1e-12;
constexpr std::int64_t kMaxUpdateSlots = 1'000'000;

bool CloseRel(double a, double b) {
  return std::abs(a - b) <= kIdentityTol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

PvmwConfig PvmwConfig::FromEta(double rho, double beta,
                               std::int64_t max_queries, std::int64_t n, int k,
                               double eta, double zeta, double trunc_bound) {
  PvmwConfig config;
  config.rho = rho;
  config.beta = beta;
  config.max_queries = max_queries;
  config.zeta = zeta;
  config.trunc_bound = trunc_bound;
  config.eta = eta;
  config.n = n;
  config.k = k;
  config.tau = 16.0 * eta;
  const double ratio = std::log(static_cast<double>(k)) / (eta * eta);
  if (ratio >= static_cast<double>(kMaxUpdateSlots)) {
    throw std::invalid_argument(
        "PvmwConfig: ln(k)/eta^2 implies more than 1e6 update slots");
  }
  config.max_updates = 1 + static_cast<std::int64_t>(std::floor(ratio));
  config.sigma = std::sqrt(2.0 * static_cast<double>(config.max_updates) /
                           ((1.0 - zeta) * rho));
  config.eps_prime =
      std::sqrt(zeta * rho / static_cast<double>(config.max_updates));
  config.Validate();
  return config;
}

void PvmwConfig::Validate() const {
  if (!(rho > 0.0)) throw std::invalid_argument("PvmwConfig: rho must be > 0");
  if (!(beta > 0.0 && beta < 0.5)) {
    throw std::invalid_argument("PvmwConfig: beta must be in (0, 1/2)");
  }
  if (max_queries < 1) {
    throw std::invalid_argument("PvmwConfig: max_queries must be >= 1");
  }
  if (!(zeta > 0.0 && zeta < 1.0)) {
    throw std::invalid_argument("PvmwConfig: zeta must be in (0, 1)");
  }
  if (!(trunc_bound > 0.0) || !(eta > 0.0)) {
    throw std::invalid_argument("PvmwConfig: eta and c must be positive");
  }
  if (n < 1 || k < 2) {
    throw std::invalid_argument("PvmwConfig: need n >= 1, k >= 2");
  }
  const std::int64_t expected_updates =
      1 + static_cast<std::int64_t>(
              std::floor(std::log(static_cast<double>(k)) / (eta * eta)));
  if (max_updates != expected_updates) {
    throw std::invalid_argument("PvmwConfig: max_updates != 1 + floor(ln k / eta^2)");
  }
  if (!CloseRel(tau, 16.0 * eta)) {
    throw std::invalid_argument("PvmwConfig: tau != 16 eta");
  }
  if (!CloseRel(sigma, std::sqrt(2.0 * static_cast<double>(max_updates) /
                                 ((1.0 - zeta) * rho)))) {
    throw std::invalid_argument(
        "PvmwConfig: sigma != sqrt(2 L_max / ((1-zeta) rho))");
  }
  if (!CloseRel(eps_prime,
                std::sqrt(zeta * rho / static_cast<double>(max_updates)))) {
    throw std::invalid_argument(
        "PvmwConfig: eps_prime != sqrt(zeta rho / L_max)");
  }
}

double EtaLowerBound(double eta, double rho, double beta, std::int64_t T,
                     std::int64_t n, int k) {
  const double ln_k = std::log(static_cast<double>(k));
  const double log_arg = static_cast<double>(n) * static_cast<double>(T) *
                         ln_k / (rho * beta * eta);
  if (log_arg <= 1.0) return 0.0;
  return 1000.0 * std::pow(ln_k / rho, 0.25) * std::sqrt(std::log(log_arg)) /
         std::sqrt(static_cast<double>(n));
}

PvmwConfig DeriveConfig(double rho, double beta, std::int64_t max_queries,
                        std::int64_t n, int k, double zeta,
                        double trunc_bound) {
  if (!(rho > 0.0)) throw std::invalid_argument("DeriveConfig: rho must be > 0");
  if (!(beta > 0.0 && beta < 0.5)) {
    throw std::invalid_argument("DeriveConfig: beta must be in (0, 1/2)");
  }
  if (max_queries < 1 || n < 1 || k < 2) {
    throw std::invalid_argument("DeriveConfig: need T >= 1, n >= 1, k >= 2");
  }
  if (rho >= 1.0) {
    Warn("DeriveConfig: rho=" + FormatDouble(rho) +
         " outside the analyzed range (0, 1)");
  }

  const auto satisfied = [&](double eta) {
    return eta > EtaLowerBound(eta, rho, beta, max_queries, n, k);
  };
  double lo = 1e-12;
  double hi = 1e6;
  if (!satisfied(hi)) {
    throw std::domain_error(
        "DeriveConfig: no learning rate below 1e6 satisfies the bound; "
        "inputs are pathological");
  }
  if (satisfied(lo)) {
    hi = lo;
  } else {
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (satisfied(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
  }
  const double eta = hi;
  if (eta > 0.1) {
    Warn("DeriveConfig: eta=" + FormatDouble(eta) +
         " > 0.1; the accuracy guarantee is vacuous at this size (the "
         "session still runs with these parameters)");
  }
  return PvmwConfig::FromEta(rho, beta, max_queries, n, k, eta, zeta,
                             trunc_bound);
}

double TheoreticalAlpha(const PvmwConfig& config) { return 18.0 * config.eta; }

PvmwSession::PvmwSession(const Dataset& data, const PvmwConfig& config,
                         std::uint64_t seed)
    : data_(data),
      config_(config),
      beliefs_(BeliefState::Uniform(data.size(), data.private_domain_size())),
      ledger_(config.rho),
      threshold_noise_src_(seed, static_cast<std::uint64_t>(NoiseRole::kThreshold)),
      query_noise_src_(seed, static_cast<std::uint64_t>(NoiseRole::kQuery)),
      norm_noise_src_(seed, static_cast<std::uint64_t>(NoiseRole::kNormEstimate)),
      gaussian_src_(seed, static_cast<std::uint64_t>(NoiseRole::kGaussian)) {
  config_.Validate();
  if (config_.n != data.size() || config_.k != data.private_domain_size()) {
    throw std::invalid_argument(
        "PvmwSession: config (n, k) does not match the dataset");
  }
  // Worst-case composition charged up front: every update slot costs
  // 0.5 eps'^2 (AboveThreshold) + 0.5 eps'^2 (norm estimate) + 2/sigma^2
  // (Gaussian) = rho / L_max.
  const double above_threshold_rho = 0.5 * config_.eps_prime * config_.eps_prime;
  const double gaussian_rho = 2.0 / (config_.sigma * config_.sigma);
  for (std::int64_t slot = 1; slot <= config_.max_updates; ++slot) {
    const std::string suffix = "[" + std::to_string(slot) + "]";
    ledger_.Charge("above_threshold" + suffix, above_threshold_rho);
    ledger_.Charge("norm_estimate" + suffix, above_threshold_rho);
    ledger_.Charge("gaussian_release" + suffix, gaussian_rho);
  }
  chi_ = DrawLaplace(NoiseRole::kThreshold,
                     4.0 / (config_.eps_prime * static_cast<double>(config_.n)));
}

double PvmwSession::DrawLaplace(NoiseRole role, double scale) {
  noise_trace_.push_back({role, scale, 1});
  NoiseSource* src = nullptr;
  switch (role) {
    case NoiseRole::kThreshold: src = &threshold_noise_src_; break;
    case NoiseRole::kQuery: src = &query_noise_src_; break;
    case NoiseRole::kNormEstimate: src = &norm_noise_src_; break;
    case NoiseRole::kGaussian: throw std::logic_error("wrong draw type");
  }
  return SampleLaplace(scale, *src);
}

void PvmwSession::EnableTranscript(std::ostream* out,
                                   bool include_error_vs_truth) {
  transcript_ = out;
  transcript_errors_ = include_error_vs_truth;
}

QueryAnswer PvmwSession::Answer(const LinearVectorQuery& f) {
  if (status_ == SessionStatus::kFailed) {
    throw std::logic_error("PvmwSession: session already FAILED");
  }
  if (status_ == SessionStatus::kExhausted ||
      answered_queries_ >= config_.max_queries) {
    throw std::logic_error("PvmwSession: query budget T exhausted");
  }

  const double n = static_cast<double>(config_.n);
  const double nu_scale = 8.0 / (config_.eps_prime * n);
  const double xi_scale = 2.0 / (config_.eps_prime * n);
  const double chi_scale = 4.0 / (config_.eps_prime * n);
  const double z_scale = 2.0 * config_.sigma / n;

  const std::int64_t updates_before = update_count_;
  const std::int64_t clip_before = f.clip_warning_count();
  const std::vector<double> true_mean = QueryTrueMean(f, data_);

  QueryAnswer answer;
  while (true) {
    std::vector<double> estimate = QueryBeliefMean(f, beliefs_, data_);
    const double gap = L2Distance(estimate, true_mean);
    const double nu = DrawLaplace(NoiseRole::kQuery, nu_scale);
    if (!AboveThresholdStep(gap, config_.tau, chi_, nu)) {
      // Below threshold: the belief-state evaluation is accurate enough.
      ++answered_queries_;
      if (answered_queries_ >= config_.max_queries) {
        status_ = SessionStatus::kExhausted;
      }
      answer.status = AnswerStatus::kOk;
      answer.estimate = std::move(estimate);
      answer.updates_consumed = update_count_;
      break;
    }
    if (update_count_ + 1 >= config_.max_updates) {
      // The required update would consume the last slot; the analysis only
      // composes over L_max slots, so the session halts permanently.
      status_ = SessionStatus::kFailed;
      answer.status = AnswerStatus::kFail;
      answer.updates_consumed = update_count_;
      break;
    }
    noise_trace_.push_back({NoiseRole::kGaussian, z_scale, f.dim()});
    std::vector<double> v(true_mean);
    for (double& x : v) x += z_scale * gaussian_src_.NextGaussian();
    const double xi = DrawLaplace(NoiseRole::kNormEstimate, xi_scale);
    double iota = gap + xi;
    if (iota <= 0.0) iota = kIotaFloor;
    beliefs_ = MwuUpdateWithRates(beliefs_, f, v, iota, config_.eta,
                                  config_.trunc_bound, data_);
    ++update_count_;
    chi_ = DrawLaplace(NoiseRole::kThreshold, chi_scale);
  }

  clip_warnings_ += f.clip_warning_count() - clip_before;
  if (transcript_ != nullptr) {
    *transcript_ << "{\"t\":" << answered_queries_
                 << ",\"updates_before\":" << updates_before
                 << ",\"updates_after\":" << update_count_ << ",\"status\":\""
                 << (answer.status == AnswerStatus::kOk ? "OK" : "FAIL")
                 << "\"";
    if (transcript_errors_ && answer.estimate.has_value()) {
      *transcript_ << ",\"error_vs_truth\":"
                   << FormatDouble(L2Distance(*answer.estimate, true_mean));
    }
    *transcript_ << "}\n";
  }
  return answer;
}

}  // namespace semidp
