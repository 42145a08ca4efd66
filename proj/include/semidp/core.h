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

#ifndef SEMIDP_CORE_H_
#define SEMIDP_CORE_H_

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace semidp {

// Public features are opaque to this library; query implementations decide
// how to interpret them. For the built-in query families, payload[0] holds
// the example's public index.
using PublicPayload = std::vector<double>;

struct Example {
  PublicPayload public_payload;
  int private_value = 0;  // index into [0, k)
};

// Immutable collection of examples with a fixed private-feature domain of
// size k. Safe to share across threads.
class Dataset {
 public:
  Dataset(std::vector<Example> examples, int private_domain_size);

  std::int64_t size() const { return static_cast<std::int64_t>(examples_.size()); }
  int private_domain_size() const { return private_domain_size_; }
  const Example& example(std::int64_t i) const { return examples_[static_cast<std::size_t>(i)]; }
  const std::vector<Example>& examples() const { return examples_; }

 private:
  std::vector<Example> examples_;
  int private_domain_size_;
};

// A query mapping each (public payload, private value) into the d-dimensional
// Euclidean unit ball. Evaluations outside the ball are defensively rescaled
// to unit norm and counted, since the accuracy and sensitivity bounds all
// assume unit-ball values.
//
// Subclasses whose outputs are in the unit ball by construction may override
// AccumulateInto / InnerProduct with allocation-free fast paths; the default
// implementations evaluate densely into caller-provided scratch and apply the
// rescale.
class LinearVectorQuery {
 public:
  explicit LinearVectorQuery(int dim);
  virtual ~LinearVectorQuery() = default;

  int dim() const { return dim_; }
  std::int64_t clip_warning_count() const { return clip_warnings_.load(); }

  // Raw evaluation; |out| has size dim().
  virtual void Eval(const PublicPayload& pub, int private_value,
                    std::span<double> out) const = 0;

  // acc += weight * value, where value is the evaluation after the unit-ball
  // safeguard. |scratch| must have size dim() and is clobbered.
  virtual void AccumulateInto(const PublicPayload& pub, int private_value,
                              double weight, std::span<double> acc,
                              std::span<double> scratch) const;

  // Returns <phi, value> with the same safeguard applied.
  virtual double InnerProduct(const PublicPayload& pub, int private_value,
                              std::span<const double> phi,
                              std::span<double> scratch) const;

 protected:
  // Rescales v to unit norm when it exceeds the ball, counting the event.
  void EnforceUnitBall(std::span<double> v) const;

 private:
  int dim_;
  mutable std::atomic<std::int64_t> clip_warnings_{0};
};

// Table-backed query: value(pub, y) = table row at (payload[0], y). Rows that
// are certified unit-norm at construction take the fast paths.
class TableQuery : public LinearVectorQuery {
 public:
  TableQuery(std::int64_t n, int k, int dim, std::vector<double> table);

  void Eval(const PublicPayload& pub, int private_value,
            std::span<double> out) const override;
  void AccumulateInto(const PublicPayload& pub, int private_value,
                      double weight, std::span<double> acc,
                      std::span<double> scratch) const override;
  double InnerProduct(const PublicPayload& pub, int private_value,
                      std::span<const double> phi,
                      std::span<double> scratch) const override;

 private:
  const double* Row(const PublicPayload& pub, int private_value) const;

  std::int64_t n_;
  int k_;
  std::vector<double> table_;  // n * k * dim, row-major
  bool unit_certified_;
};

// Callback-backed query for caller-supplied evaluation functions. Always
// goes through the dense safeguarded path.
class CallbackQuery : public LinearVectorQuery {
 public:
  using EvalFn =
      std::function<void(const PublicPayload&, int, std::span<double>)>;
  CallbackQuery(int dim, EvalFn eval);

  void Eval(const PublicPayload& pub, int private_value,
            std::span<double> out) const override;

 private:
  EvalFn eval_;
};

// value(pub, y) = base + coeff * e_{k*payload[0] + y}. Used for the
// coordinate-indicator gradient queries, where evaluations are sparse
// updates of a shared dense base. The constructor checks the unit-ball
// certificate ||base|| + |coeff| <= 1 (+ tolerance).
class AffineIndicatorQuery : public LinearVectorQuery {
 public:
  AffineIndicatorQuery(int k, std::vector<double> base, double coeff, int dim);

  void Eval(const PublicPayload& pub, int private_value,
            std::span<double> out) const override;
  void AccumulateInto(const PublicPayload& pub, int private_value,
                      double weight, std::span<double> acc,
                      std::span<double> scratch) const override;
  double InnerProduct(const PublicPayload& pub, int private_value,
                      std::span<const double> phi,
                      std::span<double> scratch) const override;

 private:
  std::int64_t CoordinateIndex(const PublicPayload& pub,
                               int private_value) const;

  int k_;
  std::vector<double> base_;  // empty means zero base
  double coeff_;
};

// One distribution over the k private values per example; rows sum to 1.
class BeliefState {
 public:
  static BeliefState Uniform(std::int64_t rows, int cols);
  // Validates row-stochasticity (1e-9 absolute) and nonnegativity.
  BeliefState(std::int64_t rows, int cols, std::vector<double> row_major);

  std::int64_t rows() const { return rows_; }
  int cols() const { return cols_; }
  std::span<const double> row(std::int64_t i) const {
    return {probs_.data() + static_cast<std::size_t>(i) * cols_,
            static_cast<std::size_t>(cols_)};
  }
  std::span<double> mutable_row(std::int64_t i) {
    return {probs_.data() + static_cast<std::size_t>(i) * cols_,
            static_cast<std::size_t>(cols_)};
  }
  double at(std::int64_t i, int y) const {
    return probs_[static_cast<std::size_t>(i) * cols_ + y];
  }

 private:
  BeliefState(std::int64_t rows, int cols);

  std::int64_t rows_;
  int cols_;
  std::vector<double> probs_;
};

enum class AnswerStatus { kOk, kFail };

struct QueryAnswer {
  AnswerStatus status = AnswerStatus::kOk;
  std::optional<std::vector<double>> estimate;  // absent iff status == kFail
  std::int64_t updates_consumed = 0;
};

// f(D) = (1/n) sum_i f(x_i). Deterministic independently of thread count.
std::vector<double> QueryTrueMean(const LinearVectorQuery& f,
                                  const Dataset& data);

// f(p; D) = (1/n) sum_i sum_y p_i(y) f(x_i^pub, y).
std::vector<double> QueryBeliefMean(const LinearVectorQuery& f,
                                    const BeliefState& p, const Dataset& data);

}  // namespace semidp

#endif  // SEMIDP_CORE_H_
