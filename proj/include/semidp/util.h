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

#ifndef SEMIDP_UTIL_H_
#define SEMIDP_UTIL_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace semidp {

// Non-fatal diagnostics (out-of-range parameters, defensive rescales, ...).
// Messages go to stderr unless a handler is installed; tests install a
// capturing handler.
void Warn(const std::string& message);
using WarningHandler = std::function<void(const std::string&)>;
void SetWarningHandler(WarningHandler handler);

// Neumaier compensated summation.
class CompensatedSum {
 public:
  void Add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }
  double Total() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

// Shortest round-trip decimal representation (std::to_chars), so CSV output
// is byte-stable across runs.
std::string FormatDouble(double value);

// 64-bit FNV-1a; used for config hashes in CSV rows.
std::uint64_t Fnv1a64(std::string_view bytes);

// SplitMix64 step; used to derive engine seeds from (seed, stream_id).
std::uint64_t SplitMix64(std::uint64_t& state);

double SquaredL2Norm(std::span<const double> v);
double L2Norm(std::span<const double> v);
double L2Distance(std::span<const double> a, std::span<const double> b);
double DotProduct(std::span<const double> a, std::span<const double> b);

}  // namespace semidp

#endif  // SEMIDP_UTIL_H_
