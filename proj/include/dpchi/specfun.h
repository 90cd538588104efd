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

#ifndef DPCHI_SPECFUN_H_
#define DPCHI_SPECFUN_H_

// Regularized incomplete gamma functions and the chi-square distribution
// functions built on them. Everything here is pure and reentrant.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dpchi/errors.h"

namespace dpchi {

// Central (ncp == 0) or noncentral chi-square law.
struct ChiSquareSpec {
  int df = 1;
  double ncp = 0.0;

  ChiSquareSpec() = default;
  ChiSquareSpec(int degrees_of_freedom, double noncentrality = 0.0)
      : df(degrees_of_freedom), ncp(noncentrality) {
    internal::Require(df >= 1, "chi-square df must be >= 1, got " +
                                   std::to_string(df));
    internal::Require(ncp >= 0.0 && std::isfinite(ncp),
                      "chi-square noncentrality must be finite and >= 0");
  }
};

namespace internal {

inline double LogGamma(double a) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(a, &sign);
#else
  return std::lgamma(a);
#endif
}

constexpr int kMaxGammaIterations = 1'000'000;
constexpr double kGammaEps = 1e-16;

// log(x^a e^-x / Gamma(a)).
inline double GammaPrefactorLog(double a, double x) {
  return a * std::log(x) - x - LogGamma(a);
}

// P(a, x) by its power series; converges quickly for x < a + 1.
inline double LowerGammaSeries(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int i = 0; i < kMaxGammaIterations; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * kGammaEps) break;
  }
  return sum * std::exp(GammaPrefactorLog(a, x));
}

// Q(a, x) by its continued fraction (modified Lentz); used for x >= a + 1.
inline double UpperGammaContinuedFraction(double a, double x) {
  constexpr double kTiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxGammaIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(GammaPrefactorLog(a, x)) * h;
}

inline void CheckGammaArgs(double a, double x) {
  Require(a > 0.0 && std::isfinite(a),
          "incomplete gamma requires a > 0, got " + std::to_string(a));
  Require(x >= 0.0 && !std::isnan(x),
          "incomplete gamma requires x >= 0, got " + std::to_string(x));
}

}  // namespace internal

// Regularized lower incomplete gamma P(a, x).
inline double RegLowerGamma(double a, double x) {
  internal::CheckGammaArgs(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return internal::LowerGammaSeries(a, x);
  return 1.0 - internal::UpperGammaContinuedFraction(a, x);
}

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), accurate in the
// upper tail.
inline double RegUpperGamma(double a, double x) {
  internal::CheckGammaArgs(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - internal::LowerGammaSeries(a, x);
  return internal::UpperGammaContinuedFraction(a, x);
}

namespace internal {

// Poisson(ncp/2) mixture of central chi-square CDFs (or survival functions),
// summed outward from the modal index until the accumulated Poisson weight
// reaches 1 - 1e-12.
template <typename CentralFn>
double NoncentralMixture(const ChiSquareSpec& spec, double x,
                         CentralFn central) {
  constexpr double kMassTolerance = 1e-12;
  const double mean = spec.ncp / 2.0;
  const double half_x = x / 2.0;
  const double half_df = spec.df / 2.0;
  const long mode = static_cast<long>(std::floor(mean));
  const double mode_weight = std::exp(-mean + mode * std::log(mean) -
                                      LogGamma(static_cast<double>(mode) + 1));

  double total = mode_weight * central(half_df + mode, half_x);
  double mass = mode_weight;

  double up_weight = mode_weight;
  double down_weight = mode_weight;
  long up = mode;
  long down = mode;
  while (mass < 1.0 - kMassTolerance) {
    bool advanced = false;
    if (down > 0) {
      down_weight *= static_cast<double>(down) / mean;
      --down;
      total += down_weight * central(half_df + down, half_x);
      mass += down_weight;
      advanced = true;
    }
    up_weight *= mean / static_cast<double>(up + 1);
    ++up;
    total += up_weight * central(half_df + up, half_x);
    mass += up_weight;
    // Past the mode the upward weights only shrink; once they are negligible
    // and the downward side is exhausted, nothing further can contribute.
    if (!advanced && up_weight < kMassTolerance * 1e-4) break;
  }
  return total;
}

}  // namespace internal

// Chi-square CDF. Noncentral laws use the Poisson-mixture series.
inline double Chi2Cdf(const ChiSquareSpec& spec, double x) {
  internal::Require(x >= 0.0 && !std::isnan(x),
                    "chi-square CDF requires x >= 0");
  if (spec.ncp == 0.0) return RegLowerGamma(spec.df / 2.0, x / 2.0);
  if (x == 0.0) return 0.0;
  const double cdf = internal::NoncentralMixture(
      spec, x, [](double a, double hx) { return RegLowerGamma(a, hx); });
  return std::clamp(cdf, 0.0, 1.0);
}

// Upper tail 1 - CDF, computed directly so small tails keep their precision.
inline double Chi2Survival(const ChiSquareSpec& spec, double x) {
  internal::Require(x >= 0.0 && !std::isnan(x),
                    "chi-square survival requires x >= 0");
  if (spec.ncp == 0.0) return RegUpperGamma(spec.df / 2.0, x / 2.0);
  if (x == 0.0) return 1.0;
  const double sf = internal::NoncentralMixture(
      spec, x, [](double a, double hx) { return RegUpperGamma(a, hx); });
  return std::clamp(sf, 0.0, 1.0);
}

// Density of the central law; used for Newton steps in the quantile.
inline double Chi2Pdf(int df, double x) {
  if (x <= 0.0) return 0.0;
  const double k = df / 2.0;
  return std::exp((k - 1.0) * std::log(x) - x / 2.0 - k * std::log(2.0) -
                  internal::LogGamma(k));
}

// Quantile of the central chi-square law: bracket, then Newton steps guarded
// by bisection. Upper quantiles are solved on the survival function so that
// p close to 1 keeps its precision.
inline double Chi2Quantile(const ChiSquareSpec& spec, double p) {
  internal::Require(p > 0.0 && p < 1.0,
                    "chi-square quantile requires p in (0,1), got " +
                        std::to_string(p));
  internal::Require(spec.ncp == 0.0,
                    "chi-square quantile is only available for ncp = 0");
  const bool upper = p > 0.5;
  const double tail = 1.0 - p;
  // Increasing in x, zero at the quantile.
  auto excess = [&](double x) {
    return upper ? tail - Chi2Survival(spec, x) : Chi2Cdf(spec, x) - p;
  };
  double lo = 0.0;
  double hi = std::max(1.0, static_cast<double>(spec.df));
  while (excess(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 2000; ++i) {
    const double f = excess(x);
    if (f == 0.0) return x;
    if (f < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 1e-15 * hi) break;
    const double pdf = Chi2Pdf(spec.df, x);
    double next = pdf > 0.0 ? x - f / pdf : lo - 1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool settled = std::fabs(next - x) <= 1e-15 * x;
    x = next;
    if (settled) break;
  }
  return x;
}

}  // namespace dpchi

#endif  // DPCHI_SPECFUN_H_
