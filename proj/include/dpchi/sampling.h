//
// Copyright 2026 The dpchi Authors
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
//

#ifndef DPCHI_SAMPLING_H_
#define DPCHI_SAMPLING_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include "dpchi/errors.h"
#include "dpchi/histogram.h"
#include "dpchi/rng.h"

namespace dpchi {

// Standard normal draw by Box-Muller. Always consumes two 64-bit words.
inline double SampleStandardNormal(RngStream& rng) {
  const double u1 = rng.UniformOpen();
  const double u2 = rng.Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

// Laplace(0, scale) by inversion of its CDF. Consumes one 64-bit word.
inline double SampleLaplace(double scale, RngStream& rng) {
  const double u = rng.UniformOpen() - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::fabs(u));
  return u < 0.0 ? -magnitude : magnitude;
}

inline int64_t SampleBinomial(int64_t trials, double p, RngStream& rng) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  std::binomial_distribution<int64_t> dist(trials, p);
  return dist(rng);
}

// Multinomial(n, p) by sequential conditional binomials.
inline Histogram SampleMultinomial(int64_t n, std::span<const double> p,
                                   RngStream& rng) {
  internal::Require(n >= 0, "multinomial n must be nonnegative");
  internal::CheckProbabilityVector(p);
  Histogram h;
  h.counts.assign(p.size(), 0);
  int64_t remaining = n;
  double remaining_mass = 1.0;
  for (size_t i = 0; i + 1 < p.size() && remaining > 0; ++i) {
    const double conditional =
        remaining_mass > 0.0 ? std::clamp(p[i] / remaining_mass, 0.0, 1.0)
                             : 0.0;
    const int64_t draw = SampleBinomial(remaining, conditional, rng);
    h.counts[i] = draw;
    remaining -= draw;
    remaining_mass -= p[i];
  }
  h.counts.back() += remaining;
  return h;
}

}  // namespace dpchi

#endif  // DPCHI_SAMPLING_H_
