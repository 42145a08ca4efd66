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

#ifndef SEMIDP_NOISE_H_
#define SEMIDP_NOISE_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace semidp {

// Seeded random stream. One independent stream per noise role, so inserting
// draws into one role never shifts another role's sequence. Both transforms
// consume exactly one uniform per sample (no rejection), which keeps the
// draw index aligned with the sample index.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard; samples are reproducible across platforms up to libm rounding.
// Not cryptographic.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::int64_t draw_count() const { return draws_; }

  std::uint64_t NextUint64();
  // Uniform on (0, 1), strictly open on both ends.
  double NextUniform();
  // Standard normal via the inverse CDF.
  double NextGaussian();
  // Laplace with the given scale via the inverse CDF.
  double NextLaplace(double scale);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::int64_t draws_ = 0;
};

// Lap(scale) sample; throws on scale <= 0.
double SampleLaplace(double scale, NoiseSource& src);

// d i.i.d. N(0, sigma^2) coordinates; throws on invalid d or sigma.
std::vector<double> SampleGaussianVector(int dim, double sigma,
                                         NoiseSource& src);
void SampleGaussianVector(double sigma, NoiseSource& src,
                          std::span<double> out);

// Inverse standard normal CDF (Wichura's AS 241, double precision).
// Requires p in (0, 1).
double InverseNormalCdf(double p);

}  // namespace semidp

#endif  // SEMIDP_NOISE_H_
