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

#include "semidp/noise.h"

#include <cmath>
#include <stdexcept>

#include "semidp/util.h"

namespace semidp {

namespace {

std::uint64_t DeriveEngineSeed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed;
  std::uint64_t s = SplitMix64(state);
  state = s ^ (stream_id * 0xD1B54A32D192ED03ULL);
  return SplitMix64(state);
}

}  // namespace

NoiseSource::NoiseSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id),
      engine_(DeriveEngineSeed(seed, stream_id)) {}

std::uint64_t NoiseSource::NextUint64() {
  ++draws_;
  return engine_();
}

double NoiseSource::NextUniform() {
  // 53 significant bits, offset by half an ulp so 0 and 1 are unreachable.
  const std::uint64_t bits = NextUint64() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double NoiseSource::NextGaussian() { return InverseNormalCdf(NextUniform()); }

double NoiseSource::NextLaplace(double scale) {
  const double u = NextUniform();
  return u < 0.5 ? scale * std::log(2.0 * u) : -scale * std::log(2.0 * (1.0 - u));
}

double SampleLaplace(double scale, NoiseSource& src) {
  if (!(scale > 0.0)) {
    throw std::invalid_argument("SampleLaplace: scale must be positive");
  }
  return src.NextLaplace(scale);
}

std::vector<double> SampleGaussianVector(int dim, double sigma,
                                         NoiseSource& src) {
  if (dim < 1) {
    throw std::invalid_argument("SampleGaussianVector: dim must be >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(dim));
  SampleGaussianVector(sigma, src, out);
  return out;
}

void SampleGaussianVector(double sigma, NoiseSource& src,
                          std::span<double> out) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("SampleGaussianVector: sigma must be positive");
  }
  for (double& x : out) x = sigma * src.NextGaussian();
}

double InverseNormalCdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("InverseNormalCdf: p must be in (0, 1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r +
                4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r +
              1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r +
            3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r +
                2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r +
              6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r +
            1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r +
             1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r +
           5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r +
         1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r +
             1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r +
           1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r +
         1.0);
  } else {
    r -= 5.0;
    value =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r +
             2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r +
           1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r +
         6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r +
             7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r +
           1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r +
         1.0);
  }
  return q < 0.0 ? -value : value;
}

}  // namespace semidp
