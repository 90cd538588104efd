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

#ifndef DPCHI_GOF_H_
#define DPCHI_GOF_H_

// Private goodness-of-fit tests of H0: p = p0 on a noisy histogram.
//
// With U = sqrt(n) ((X + Z)/n - p0), s = v/n and w_i = p0_i / (p0_i + s):
//
//   Q     = U' (Sigma + sI)^-1 U
//         = sum_i U_i^2 / (p0_i + s) + (sum_j w_j U_j)^2 / (s sum_l w_l)
//   Q_hat = U' P (Sigma + sI)^-1 P U
//         = Q - (sum_i U_i)^2 / (s d)          [= Q - (n~ - n)^2 / (v d)]
//
// Q is asymptotically chi^2_d and Q_hat chi^2_{d-1} under H0 with Gaussian
// noise. Both forms accept any per-cell variance v, which is how the Laplace
// variants reuse them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpchi/covariance.h"
#include "dpchi/errors.h"
#include "dpchi/histogram.h"
#include "dpchi/mechanisms.h"
#include "dpchi/rng.h"
#include "dpchi/sampling.h"
#include "dpchi/specfun.h"

namespace dpchi {

enum class StatisticKind { kUnprojected, kProjected };

enum class Decision { kReject, kFailToReject, kInconclusive };

inline const char* DecisionName(Decision d) {
  switch (d) {
    case Decision::kReject:
      return "Reject";
    case Decision::kFailToReject:
      return "FailToReject";
    case Decision::kInconclusive:
      return "Inconclusive";
  }
  return "?";
}

struct GofStatistic {
  StatisticKind kind = StatisticKind::kProjected;
  double value = 0.0;
  int df = 1;
  std::vector<double> centered;
};

struct TestReport {
  GofStatistic statistic;
  double threshold = 0.0;
  double alpha = 0.05;
  Decision decision = Decision::kFailToReject;
  // Set for Monte Carlo tests.
  std::optional<int> mc_samples_used;
  // Minimum chi-square tests only.
  std::vector<double> theta_hat;
  bool converged = true;
  int replicate_failures = 0;
};

// Options shared by the Monte Carlo tests.
struct McOptions {
  int samples = 59;
  // Per-cell variance assumed by the statistic; defaults to the true variance
  // of the added noise (8/eps^2 for Laplace).
  std::optional<double> assumed_noise_variance;
  // Minimum chi-square only: evaluate replicates at the observed theta_hat
  // instead of re-running the estimation pipeline.
  bool freeze_theta = false;
};

namespace internal {

inline void CheckAlpha(double alpha) {
  Require(alpha > 0.0 && alpha < 1.0,
          "alpha must lie in (0,1), got " + std::to_string(alpha));
}

inline void CheckNoisy(const NoisyHistogram& nh) {
  Require(nh.n > 0, "histogram total n must be positive");
  Require(nh.noise_variance > 0.0 && std::isfinite(nh.noise_variance),
          "noise variance must be finite and positive");
}

// U' (Sigma(p_mid) + sI)^-1 U, or its projected version, in closed form.
// Shared by the goodness-of-fit and minimum chi-square statistics.
inline double ClosedFormStatistic(std::span<const double> u,
                                  std::span<const double> p_mid, double s,
                                  StatisticKind kind) {
  double diag = 0.0;
  double weighted = 0.0;
  double w_sum = 0.0;
  double u_sum = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    const double denom = p_mid[i] + s;
    const double w = p_mid[i] / denom;
    diag += u[i] * u[i] / denom;
    weighted += w * u[i];
    w_sum += w;
    u_sum += u[i];
  }
  double value = diag + weighted * weighted / (s * w_sum);
  if (kind == StatisticKind::kProjected) {
    value -= u_sum * u_sum / (s * static_cast<double>(u.size()));
  }
  return value;
}

inline int GofDegreesOfFreedom(int d, StatisticKind kind) {
  return kind == StatisticKind::kProjected ? d - 1 : d;
}

}  // namespace internal

// U = sqrt(n) (values / n - p0).
inline std::vector<double> CenteredVector(const NoisyHistogram& nh,
                                          std::span<const double> p0) {
  internal::RequireShape(
      nh.values.size() == p0.size(),
      "histogram has " + std::to_string(nh.values.size()) +
          " cells but the null has " + std::to_string(p0.size()));
  internal::Require(nh.n > 0, "histogram total n must be positive");
  const double n = static_cast<double>(nh.n);
  const double root_n = std::sqrt(n);
  std::vector<double> u(p0.size());
  for (size_t i = 0; i < u.size(); ++i) u[i] = root_n * (nh.values[i] / n - p0[i]);
  return u;
}

inline GofStatistic GofStatisticOf(const NoisyHistogram& nh,
                                   std::span<const double> p0,
                                   StatisticKind kind) {
  internal::CheckNull(p0);
  internal::CheckNoisy(nh);
  GofStatistic stat;
  stat.kind = kind;
  stat.centered = CenteredVector(nh, p0);
  stat.df = internal::GofDegreesOfFreedom(nh.size(), kind);
  const double s = nh.noise_variance / static_cast<double>(nh.n);
  stat.value = internal::ClosedFormStatistic(stat.centered, p0, s, kind);
  return stat;
}

inline GofStatistic UnprojectedStatistic(const NoisyHistogram& nh,
                                         std::span<const double> p0) {
  return GofStatisticOf(nh, p0, StatisticKind::kUnprojected);
}

inline GofStatistic ProjectedStatistic(const NoisyHistogram& nh,
                                       std::span<const double> p0) {
  return GofStatisticOf(nh, p0, StatisticKind::kProjected);
}

// The classical (non-private) Pearson goodness-of-fit statistic on raw
// counts, sum (X_i - n p0_i)^2 / (n p0_i), with d - 1 degrees of freedom.
inline double ClassicalGofStatistic(const Histogram& h,
                                    std::span<const double> p0) {
  internal::CheckNull(p0);
  internal::RequireShape(h.counts.size() == p0.size(),
                         "histogram and null differ in length");
  const double n = static_cast<double>(h.Total());
  internal::Require(n > 0, "histogram total n must be positive");
  double q = 0.0;
  for (size_t i = 0; i < p0.size(); ++i) {
    const double expected = n * p0[i];
    const double diff = static_cast<double>(h.counts[i]) - expected;
    q += diff * diff / expected;
  }
  return q;
}

inline TestReport ClassicalGofTest(const Histogram& h,
                                   std::span<const double> p0, double alpha) {
  internal::CheckAlpha(alpha);
  TestReport report;
  report.alpha = alpha;
  report.statistic.kind = StatisticKind::kProjected;
  report.statistic.value = ClassicalGofStatistic(h, p0);
  report.statistic.df = static_cast<int>(p0.size()) - 1;
  report.threshold = Chi2Quantile(report.statistic.df, 1.0 - alpha);
  report.decision = report.statistic.value > report.threshold
                        ? Decision::kReject
                        : Decision::kFailToReject;
  return report;
}

// Applies the asymptotic chi-square threshold to an already noisy histogram.
inline TestReport ZcdpGofDecide(const NoisyHistogram& nh,
                                std::span<const double> p0, double alpha,
                                StatisticKind kind) {
  internal::CheckAlpha(alpha);
  TestReport report;
  report.alpha = alpha;
  report.statistic = GofStatisticOf(nh, p0, kind);
  report.threshold = Chi2Quantile(report.statistic.df, 1.0 - alpha);
  report.decision = report.statistic.value > report.threshold
                        ? Decision::kReject
                        : Decision::kFailToReject;
  return report;
}

// rho-zCDP goodness-of-fit test: Gaussian noise N(0, 1/rho) per cell, then
// the chosen statistic against the (1 - alpha) chi-square quantile.
inline TestReport ZcdpGofTest(const Histogram& h, double rho, double alpha,
                              std::span<const double> p0, StatisticKind kind,
                              RngStream& rng) {
  internal::CheckAlpha(alpha);
  internal::CheckNull(p0);
  const NoisyHistogram nh = GaussianMechanism(h, rho, rng);
  return ZcdpGofDecide(nh, p0, alpha, kind);
}

inline int MinimumMcSamples(double alpha) {
  return static_cast<int>(std::ceil(1.0 / alpha - 1e-12)) - 1;
}

// The k-th smallest sample with k = ceil((m + 1)(1 - alpha)). For m = 59 and
// alpha = 0.05 this is the 57th smallest, i.e. the 3rd largest, so that an
// exchangeable observation exceeds it with probability
// floor((m + 1) alpha) / (m + 1) <= alpha.
inline double McCriticalValue(std::span<const double> samples, double alpha) {
  internal::CheckAlpha(alpha);
  const int m = static_cast<int>(samples.size());
  if (m < MinimumMcSamples(alpha)) {
    throw InsufficientSamplesError(
        "Monte Carlo test needs at least " +
        std::to_string(MinimumMcSamples(alpha)) + " samples at alpha = " +
        std::to_string(alpha) + ", got " + std::to_string(m));
  }
  const double target = (m + 1.0) * (1.0 - alpha);
  int k = static_cast<int>(std::ceil(target - 1e-9));
  k = std::clamp(k, 1, m);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  return sorted[k - 1];
}

namespace internal {

inline void CheckMcSamples(int m, double alpha) {
  if (m < MinimumMcSamples(alpha)) {
    throw InsufficientSamplesError(
        "Monte Carlo test needs at least " +
        std::to_string(MinimumMcSamples(alpha)) + " samples at alpha = " +
        std::to_string(alpha) + ", got " + std::to_string(m));
  }
}

}  // namespace internal

// Statistic of one null replicate: fresh Multinomial(n, p0) data plus fresh
// Laplace noise, evaluated with the same assumed variance as the observation.
inline double McGofReplicate(int64_t n, std::span<const double> p0,
                             double epsilon, double assumed_variance,
                             StatisticKind kind, RngStream& rng) {
  const Histogram h = SampleMultinomial(n, p0, rng);
  NoisyHistogram nh = LaplaceMechanism(h, epsilon, rng);
  nh.noise_variance = assumed_variance;
  return GofStatisticOf(nh, p0, kind).value;
}

// epsilon-DP goodness-of-fit test with a Monte Carlo critical value. Replicate
// j draws from rng.Split(j), so replicates can be evaluated in any order.
inline TestReport DpMcGofTest(const Histogram& h, double epsilon, double alpha,
                              std::span<const double> p0, StatisticKind kind,
                              const McOptions& options, RngStream& rng) {
  internal::CheckAlpha(alpha);
  internal::CheckNull(p0);
  internal::CheckMcSamples(options.samples, alpha);
  const double assumed =
      options.assumed_noise_variance.value_or(LaplaceNoiseVariance(epsilon));
  internal::Require(assumed > 0.0, "assumed noise variance must be positive");

  NoisyHistogram nh = LaplaceMechanism(h, epsilon, rng);
  nh.noise_variance = assumed;

  TestReport report;
  report.alpha = alpha;
  report.statistic = GofStatisticOf(nh, p0, kind);
  std::vector<double> replicates(options.samples);
  for (int j = 0; j < options.samples; ++j) {
    RngStream child = rng.Split(static_cast<uint64_t>(j));
    replicates[j] = McGofReplicate(nh.n, p0, epsilon, assumed, kind, child);
  }
  report.threshold = McCriticalValue(replicates, alpha);
  report.mc_samples_used = options.samples;
  report.decision = report.statistic.value > report.threshold
                        ? Decision::kReject
                        : Decision::kFailToReject;
  return report;
}

}  // namespace dpchi

#endif  // DPCHI_GOF_H_
