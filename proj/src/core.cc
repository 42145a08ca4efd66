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

#include "semidp/core.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "semidp/parallel.h"
#include "semidp/util.h"

namespace semidp {

namespace {
// Tolerance before a defensive rescale kicks in; exact-unit rows produced by
// normalization may sit a few ulps above 1.
constexpr double kUnitBallSlack = 1e-9;
}  // namespace

Dataset::Dataset(std::vector<Example> examples, int private_domain_size)
    : examples_(std::move(examples)), private_domain_size_(private_domain_size) {
  if (examples_.empty()) {
    throw std::invalid_argument("Dataset: need at least one example");
  }
  if (private_domain_size_ < 2) {
    throw std::invalid_argument("Dataset: private domain size must be >= 2");
  }
  for (const Example& x : examples_) {
    if (x.private_value < 0 || x.private_value >= private_domain_size_) {
      throw std::invalid_argument(
          "Dataset: private value " + std::to_string(x.private_value) +
          " outside [0, " + std::to_string(private_domain_size_) + ")");
    }
  }
}

LinearVectorQuery::LinearVectorQuery(int dim) : dim_(dim) {
  if (dim < 1) {
    throw std::invalid_argument("LinearVectorQuery: dim must be >= 1");
  }
}

void LinearVectorQuery::EnforceUnitBall(std::span<double> v) const {
  const double norm2 = SquaredL2Norm(v);
  if (norm2 > 1.0 + kUnitBallSlack) {
    const double scale = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= scale;
    clip_warnings_.fetch_add(1, std::memory_order_relaxed);
  }
}

void LinearVectorQuery::AccumulateInto(const PublicPayload& pub,
                                       int private_value, double weight,
                                       std::span<double> acc,
                                       std::span<double> scratch) const {
  Eval(pub, private_value, scratch);
  EnforceUnitBall(scratch);
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += weight * scratch[j];
}

double LinearVectorQuery::InnerProduct(const PublicPayload& pub,
                                       int private_value,
                                       std::span<const double> phi,
                                       std::span<double> scratch) const {
  Eval(pub, private_value, scratch);
  EnforceUnitBall(scratch);
  return DotProduct(phi, scratch);
}

TableQuery::TableQuery(std::int64_t n, int k, int dim,
                       std::vector<double> table)
    : LinearVectorQuery(dim), n_(n), k_(k), table_(std::move(table)) {
  if (static_cast<std::int64_t>(table_.size()) != n_ * k_ * dim) {
    throw std::invalid_argument("TableQuery: table size mismatch");
  }
  unit_certified_ = true;
  for (std::int64_t cell = 0; cell < n_ * k_; ++cell) {
    const std::span<const double> row(table_.data() + cell * dim,
                                      static_cast<std::size_t>(dim));
    if (SquaredL2Norm(row) > 1.0 + kUnitBallSlack) {
      unit_certified_ = false;
      break;
    }
  }
}

const double* TableQuery::Row(const PublicPayload& pub,
                              int private_value) const {
  const auto i = static_cast<std::int64_t>(pub.at(0));
  if (i < 0 || i >= n_) {
    throw std::out_of_range("TableQuery: public index out of range");
  }
  return table_.data() + (i * k_ + private_value) * dim();
}

void TableQuery::Eval(const PublicPayload& pub, int private_value,
                      std::span<double> out) const {
  const double* row = Row(pub, private_value);
  for (int j = 0; j < dim(); ++j) out[j] = row[j];
}

void TableQuery::AccumulateInto(const PublicPayload& pub, int private_value,
                                double weight, std::span<double> acc,
                                std::span<double> scratch) const {
  if (!unit_certified_) {
    LinearVectorQuery::AccumulateInto(pub, private_value, weight, acc, scratch);
    return;
  }
  const double* row = Row(pub, private_value);
  for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += weight * row[j];
}

double TableQuery::InnerProduct(const PublicPayload& pub, int private_value,
                                std::span<const double> phi,
                                std::span<double> scratch) const {
  if (!unit_certified_) {
    return LinearVectorQuery::InnerProduct(pub, private_value, phi, scratch);
  }
  const double* row = Row(pub, private_value);
  double s = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) s += phi[j] * row[j];
  return s;
}

CallbackQuery::CallbackQuery(int dim, EvalFn eval)
    : LinearVectorQuery(dim), eval_(std::move(eval)) {
  if (!eval_) {
    throw std::invalid_argument("CallbackQuery: null eval function");
  }
}

void CallbackQuery::Eval(const PublicPayload& pub, int private_value,
                         std::span<double> out) const {
  eval_(pub, private_value, out);
}

AffineIndicatorQuery::AffineIndicatorQuery(int k, std::vector<double> base,
                                           double coeff, int dim)
    : LinearVectorQuery(dim), k_(k), base_(std::move(base)), coeff_(coeff) {
  if (k < 2) {
    throw std::invalid_argument("AffineIndicatorQuery: k must be >= 2");
  }
  if (!base_.empty() && static_cast<int>(base_.size()) != dim) {
    throw std::invalid_argument("AffineIndicatorQuery: base size mismatch");
  }
  const double base_norm = base_.empty() ? 0.0 : L2Norm(base_);
  if (base_norm + std::abs(coeff_) > 1.0 + kUnitBallSlack) {
    throw std::invalid_argument(
        "AffineIndicatorQuery: ||base|| + |coeff| exceeds the unit ball");
  }
}

std::int64_t AffineIndicatorQuery::CoordinateIndex(const PublicPayload& pub,
                                                   int private_value) const {
  const auto i = static_cast<std::int64_t>(pub.at(0));
  const std::int64_t j = i * k_ + private_value;
  if (j < 0 || j >= dim()) {
    throw std::out_of_range("AffineIndicatorQuery: coordinate out of range");
  }
  return j;
}

void AffineIndicatorQuery::Eval(const PublicPayload& pub, int private_value,
                                std::span<double> out) const {
  if (base_.empty()) {
    for (double& x : out) x = 0.0;
  } else {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = base_[j];
  }
  out[static_cast<std::size_t>(CoordinateIndex(pub, private_value))] += coeff_;
}

void AffineIndicatorQuery::AccumulateInto(const PublicPayload& pub,
                                          int private_value, double weight,
                                          std::span<double> acc,
                                          std::span<double> /*scratch*/) const {
  if (!base_.empty()) {
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += weight * base_[j];
  }
  acc[static_cast<std::size_t>(CoordinateIndex(pub, private_value))] +=
      weight * coeff_;
}

double AffineIndicatorQuery::InnerProduct(const PublicPayload& pub,
                                          int private_value,
                                          std::span<const double> phi,
                                          std::span<double> /*scratch*/) const {
  double s = base_.empty() ? 0.0 : DotProduct(phi, base_);
  s += coeff_ *
       phi[static_cast<std::size_t>(CoordinateIndex(pub, private_value))];
  return s;
}

BeliefState::BeliefState(std::int64_t rows, int cols)
    : rows_(rows), cols_(cols),
      probs_(static_cast<std::size_t>(rows) * cols, 0.0) {}

BeliefState BeliefState::Uniform(std::int64_t rows, int cols) {
  if (rows < 1 || cols < 2) {
    throw std::invalid_argument("BeliefState: need rows >= 1, cols >= 2");
  }
  BeliefState state(rows, cols);
  const double p = 1.0 / cols;
  for (double& x : state.probs_) x = p;
  return state;
}

BeliefState::BeliefState(std::int64_t rows, int cols,
                         std::vector<double> row_major)
    : rows_(rows), cols_(cols), probs_(std::move(row_major)) {
  if (rows < 1 || cols < 2 ||
      probs_.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("BeliefState: shape mismatch");
  }
  for (std::int64_t i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (int y = 0; y < cols_; ++y) {
      const double p = at(i, y);
      if (p < 0.0) throw std::invalid_argument("BeliefState: negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("BeliefState: row " + std::to_string(i) +
                                  " sums to " + std::to_string(sum));
    }
  }
}

std::vector<double> QueryTrueMean(const LinearVectorQuery& f,
                                  const Dataset& data) {
  const auto n = static_cast<std::size_t>(data.size());
  const auto d = static_cast<std::size_t>(f.dim());
  std::vector<double> out(d);
  parallel::DeterministicVectorSum(
      n, d, out, [&](std::size_t begin, std::size_t end, std::span<double> acc) {
        std::vector<double> scratch(d);
        for (std::size_t i = begin; i < end; ++i) {
          const Example& x = data.example(static_cast<std::int64_t>(i));
          f.AccumulateInto(x.public_payload, x.private_value, 1.0, acc,
                           scratch);
        }
      });
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& x : out) x *= inv_n;
  return out;
}

std::vector<double> QueryBeliefMean(const LinearVectorQuery& f,
                                    const BeliefState& p, const Dataset& data) {
  if (p.rows() != data.size() || p.cols() != data.private_domain_size()) {
    throw std::invalid_argument(
        "QueryBeliefMean: belief state does not match dataset shape");
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
          const std::span<const double> row =
              p.row(static_cast<std::int64_t>(i));
          for (int y = 0; y < k; ++y) {
            if (row[y] == 0.0) continue;
            f.AccumulateInto(x.public_payload, y, row[y], acc, scratch);
          }
        }
      });
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& x : out) x *= inv_n;
  return out;
}

}  // namespace semidp
