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

#ifndef DPCHI_MECHANISMS_H_
#define DPCHI_MECHANISMS_H_

#include <cmath>
#include <vector>

#include "dpchi/errors.h"
#include "dpchi/histogram.h"
#include "dpchi/rng.h"
#include "dpchi/sampling.h"

namespace dpchi {

// Sensitivities of the histogram query between neighboring datasets of equal
// size: one record moves between two cells.
inline constexpr double kHistogramL1Sensitivity = 2.0;
inline const double kHistogramL2Sensitivity = std::sqrt(2.0);

// Per-cell noise variance of the Gaussian mechanism at rho-zCDP:
// Delta_2^2 / (2 rho) = 1 / rho.
inline double GaussianNoiseVariance(double rho) {
  internal::Require(rho > 0.0 && std::isfinite(rho),
                    "rho must be finite and positive");
  return kHistogramL2Sensitivity * kHistogramL2Sensitivity / (2.0 * rho);
}

// Laplace scale Delta_1 / epsilon = 2 / epsilon.
inline double LaplaceScale(double epsilon) {
  internal::Require(epsilon > 0.0 && std::isfinite(epsilon),
                    "epsilon must be finite and positive");
  return kHistogramL1Sensitivity / epsilon;
}

// Variance of Lap(2/epsilon) noise, 2 b^2 = 8 / epsilon^2.
inline double LaplaceNoiseVariance(double epsilon) {
  const double b = LaplaceScale(epsilon);
  return 2.0 * b * b;
}

namespace internal {

template <typename NoiseFn>
NoisyHistogram Perturb(const Histogram& h, double variance,
                       NoiseMechanism mechanism, bool retain_noise,
                       NoiseFn draw) {
  RequireShape(h.size() >= 2, "a histogram needs at least 2 cells");
  NoisyHistogram out;
  out.values.resize(h.counts.size());
  out.n = h.Total();
  out.noise_variance = variance;
  out.mechanism = mechanism;
  std::vector<double> noise(h.counts.size());
  double total = 0.0;
  for (size_t i = 0; i < h.counts.size(); ++i) {
    Require(h.counts[i] >= 0, "histogram counts must be nonnegative");
    noise[i] = draw();
    out.values[i] = static_cast<double>(h.counts[i]) + noise[i];
    total += out.values[i];
  }
  out.noisy_total = total;
  if (retain_noise) out.realized_noise = std::move(noise);
  return out;
}

}  // namespace internal

// Adds iid N(0, 1/rho) noise to every cell (rho-zCDP).
inline NoisyHistogram GaussianMechanism(const Histogram& h, double rho,
                                        RngStream& rng,
                                        bool retain_noise = false) {
  const double variance = GaussianNoiseVariance(rho);
  const double sd = std::sqrt(variance);
  return internal::Perturb(h, variance, NoiseMechanism::kGaussian,
                           retain_noise,
                           [&] { return sd * SampleStandardNormal(rng); });
}

// Adds iid Lap(2/epsilon) noise to every cell (epsilon-DP). The recorded
// variance is the true variance 8/epsilon^2.
inline NoisyHistogram LaplaceMechanism(const Histogram& h, double epsilon,
                                       RngStream& rng,
                                       bool retain_noise = false) {
  const double scale = LaplaceScale(epsilon);
  return internal::Perturb(h, LaplaceNoiseVariance(epsilon),
                           NoiseMechanism::kLaplace, retain_noise,
                           [&] { return SampleLaplace(scale, rng); });
}

// epsilon-DP implies (epsilon^2 / 2)-zCDP.
inline double ZcdpOfPure(double epsilon) {
  internal::Require(epsilon > 0.0 && std::isfinite(epsilon),
                    "epsilon must be finite and positive");
  return epsilon * epsilon / 2.0;
}

// rho-zCDP implies (rho + 2 sqrt(rho ln(1/delta)), delta)-DP.
inline double ApproxDpOfZcdp(double rho, double delta) {
  internal::Require(rho > 0.0 && std::isfinite(rho),
                    "rho must be finite and positive");
  internal::Require(delta > 0.0 && delta < 1.0, "delta must lie in (0,1)");
  return rho + 2.0 * std::sqrt(rho * std::log(1.0 / delta));
}

}  // namespace dpchi

#endif  // DPCHI_MECHANISMS_H_
