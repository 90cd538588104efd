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

#ifndef DPCHI_GWAS_H_
#define DPCHI_GWAS_H_

// Case/control association on a 3 x 2 genotype table (rows: genotypes,
// columns: cases and controls, n/2 each). The baseline here privatizes the
// Pearson statistic itself with Gaussian noise of variance
// Delta(q)^2 / (2 rho), Delta(q) = 4n / (n + 2).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "dpchi/errors.h"
#include "dpchi/gof.h"
#include "dpchi/histogram.h"
#include "dpchi/rng.h"
#include "dpchi/sampling.h"
#include "dpchi/specfun.h"

namespace dpchi {

// Pearson's sum (X_ij - E_ij)^2 / E_ij with E_ij = X_i. X_.j / n.
inline double PearsonStatistic(const ContingencyTable& table) {
  const int r = table.rows;
  const int c = table.cols;
  internal::RequireShape(r >= 1 && c >= 1, "table must be non-empty");
  const double n = static_cast<double>(table.Total());
  std::vector<double> row_sums(r);
  std::vector<double> col_sums(c);
  for (int i = 0; i < r; ++i) {
    row_sums[i] = static_cast<double>(table.RowSum(i));
    internal::Require(row_sums[i] > 0, "degenerate table: row " +
                                           std::to_string(i) + " sums to 0");
  }
  for (int j = 0; j < c; ++j) {
    col_sums[j] = static_cast<double>(table.ColSum(j));
    internal::Require(col_sums[j] > 0, "degenerate table: column " +
                                           std::to_string(j) + " sums to 0");
  }
  double q = 0.0;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      const double expected = row_sums[i] * col_sums[j] / n;
      const double diff = static_cast<double>(table.at(i, j)) - expected;
      q += diff * diff / expected;
    }
  return q;
}

// Global sensitivity of the Pearson statistic over 3 x 2 tables with n/2
// cases and n/2 controls.
inline double GwasSensitivity(int64_t n) {
  internal::Require(n >= 2 && n % 2 == 0,
                    "GWAS sensitivity needs an even n >= 2, got " +
                        std::to_string(n));
  const double x = static_cast<double>(n);
  return 4.0 * x / (x + 2.0);
}

inline double OutputPerturbationVariance(int64_t n, double rho) {
  internal::Require(rho > 0.0 && std::isfinite(rho), "rho must be positive");
  const double delta = GwasSensitivity(n);
  return delta * delta / (2.0 * rho);
}

namespace internal {

// Adaptive Simpson on [a, b].
inline double AdaptiveSimpson(const std::function<double(double)>& f, double a,
                              double b, double fa, double fm, double fb,
                              double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::fabs(diff) <= 15.0 * tol)
    return left + right + diff / 15.0;
  return AdaptiveSimpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         AdaptiveSimpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double Integrate(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (!(b > a)) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return AdaptiveSimpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

}  // namespace internal

// P[chi^2_df + N(0, sigma^2) > tau]. The noise is truncated at +-8 sigma.
inline double GaussMixtureSurvival(int df, double sigma, double tau) {
  internal::Require(sigma >= 0.0 && std::isfinite(sigma),
                    "sigma must be finite and nonnegative");
  if (sigma == 0.0) return tau <= 0.0 ? 1.0 : Chi2Survival(df, tau);
  constexpr double kTruncation = 8.0;
  const double lo = -kTruncation * sigma;
  // chi^2 is nonnegative, so S(tau - z) = 1 whenever z >= tau.
  const double split = std::clamp(tau, lo, kTruncation * sigma);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  auto integrand = [&](double z) {
    const double density = norm * std::exp(-0.5 * (z / sigma) * (z / sigma));
    return density * Chi2Survival(df, tau - z);
  };
  const double body = internal::Integrate(integrand, lo, split, 1e-10);
  const double tail = 0.5 * std::erfc(split / (sigma * std::sqrt(2.0)));
  return std::clamp(body + tail, 0.0, 1.0);
}

// tau with P[chi^2_df + N(0, sigma^2) > tau] = alpha, by bisection.
inline double GaussMixtureCriticalValue(int df, double sigma, double alpha) {
  internal::CheckAlpha(alpha);
  internal::Require(df >= 1, "df must be positive");
  internal::Require(sigma >= 0.0 && std::isfinite(sigma),
                    "sigma must be finite and nonnegative");
  if (sigma == 0.0) return Chi2Quantile(df, 1.0 - alpha);
  const double chi_q = Chi2Quantile(df, 1.0 - alpha);
  double lo = chi_q - 9.0 * sigma;
  double hi = chi_q + 9.0 * sigma;
  while (GaussMixtureSurvival(df, sigma, lo) < alpha) lo -= 9.0 * sigma;
  while (GaussMixtureSurvival(df, sigma, hi) > alpha) hi += 9.0 * sigma;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (GaussMixtureSurvival(df, sigma, mid) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-9 * std::max(1.0, std::fabs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

inline void CheckEvenSplit(const ContingencyTable& table) {
  internal::RequireShape(table.rows == 3 && table.cols == 2,
                         "output perturbation needs a 3x2 table");
  const int64_t n = table.Total();
  internal::Require(n >= 2 && n % 2 == 0 && table.ColSum(0) == n / 2 &&
                        table.ColSum(1) == n / 2,
                    "output perturbation needs n/2 cases and n/2 controls");
}

// Output perturbation with a precomputed threshold for noise level sigma.
inline TestReport OutputPerturbationDecide(const ContingencyTable& table,
                                           double sigma, double threshold,
                                           double alpha, RngStream& rng) {
  internal::CheckAlpha(alpha);
  CheckEvenSplit(table);
  TestReport report;
  report.alpha = alpha;
  report.statistic.kind = StatisticKind::kUnprojected;
  report.statistic.df = 2;
  report.statistic.value =
      PearsonStatistic(table) + sigma * SampleStandardNormal(rng);
  report.threshold = threshold;
  report.decision = report.statistic.value > report.threshold
                        ? Decision::kReject
                        : Decision::kFailToReject;
  return report;
}

// Classical Pearson statistic plus N(0, Delta(q)^2 / (2 rho)), compared with
// the matching quantile of chi^2_2 + N(0, sigma^2).
inline TestReport OutputPerturbationTest(const ContingencyTable& table,
                                         double rho, double alpha,
                                         RngStream& rng) {
  internal::CheckAlpha(alpha);
  CheckEvenSplit(table);
  const double sigma = std::sqrt(OutputPerturbationVariance(table.Total(), rho));
  return OutputPerturbationDecide(table, sigma,
                                  GaussMixtureCriticalValue(2, sigma, alpha),
                                  alpha, rng);
}

}  // namespace dpchi

#endif  // DPCHI_GWAS_H_
