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

#ifndef DPCHI_MINCHI_H_
#define DPCHI_MINCHI_H_

// Minimum chi-square tests of composite nulls H0: p = p(theta), theta in a
// feasible set. The middle matrix is fixed at the plug-in estimate
// phi(X~) before minimizing over theta:
//
//   T(theta) = U(theta)' M U(theta)          (unprojected, chi^2_{d-k})
//   T(theta) = U(theta)' P M P U(theta)      (projected,   chi^2_{d-k-1})
//
// with U(theta) = sqrt(n)(X~/n - p(theta)) and M = (Sigma(p(phi(X~))) + sI)^-1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dpchi/errors.h"
#include "dpchi/gof.h"
#include "dpchi/histogram.h"
#include "dpchi/mechanisms.h"
#include "dpchi/nelder_mead.h"
#include "dpchi/rng.h"
#include "dpchi/sampling.h"
#include "dpchi/specfun.h"

namespace dpchi {

// Output of a model's naive estimator phi.
struct NaiveEstimate {
  // Feasible parameters used for the middle matrix and as the search start.
  std::vector<double> theta;
  // The model's own judgement that the asymptotic approximation is unusable
  // for this input (for independence models: the small-expected-cell rule).
  bool inconclusive = false;
};

// A null-hypothesis family p(theta). Model authors are responsible for the
// usual regularity (bicontinuous p with a full-rank Jacobian); none of it is
// checked here.
struct ParametricModel {
  int d = 0;
  int k = 0;
  std::function<std::vector<double>(std::span<const double>)> prob_map;
  std::function<NaiveEstimate(const NoisyHistogram&)> naive_estimator;
  // Maps any point of R^k into the feasible set.
  std::function<std::vector<double>(std::span<const double>)> project;
  std::string label;
};

struct MinimizationResult {
  std::vector<double> theta_hat;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// The degenerate k = 0 model theta -> p0; recovers the goodness-of-fit tests.
inline ParametricModel ConstantModel(std::vector<double> p0) {
  internal::CheckNull(p0);
  ParametricModel model;
  model.d = static_cast<int>(p0.size());
  model.k = 0;
  model.prob_map = [p0](std::span<const double>) { return p0; };
  model.naive_estimator = [](const NoisyHistogram&) { return NaiveEstimate{}; };
  model.project = [](std::span<const double> theta) {
    return std::vector<double>(theta.begin(), theta.end());
  };
  model.label = "constant";
  return model;
}

// Smallest probability a clamped marginal may take.
inline constexpr double kMarginalFloor = 1e-6;

namespace internal {

// Full marginal vector from its first (size - 1) free entries.
inline std::vector<double> CompleteSimplex(std::span<const double> free) {
  std::vector<double> full(free.begin(), free.end());
  double sum = 0.0;
  for (double v : free) sum += v;
  full.push_back(1.0 - sum);
  return full;
}

// Clamps each entry of a free-coordinate block into [floor, 1 - floor]. If
// the implied last entry would then fall below floor, the excess of each
// entry over floor is scaled down until it does not.
inline void ProjectSimplexBlock(std::span<double> block) {
  double sum = 0.0;
  for (double& v : block) {
    v = std::clamp(v, kMarginalFloor, 1.0 - kMarginalFloor);
    sum += v;
  }
  if (sum > 1.0 - kMarginalFloor) {
    const double base = kMarginalFloor * static_cast<double>(block.size());
    const double scale = (1.0 - kMarginalFloor - base) / (sum - base);
    for (double& v : block) v = kMarginalFloor + (v - kMarginalFloor) * scale;
  }
}

}  // namespace internal

// n * pi1_i * pi2_j <= 5 for some cell, or a raw marginal outside (0, 1).
// `raw_theta` holds the unclamped naive marginals (r - 1 row entries, then
// c - 1 column entries); non-finite entries count as a failed estimate.
inline bool SmallCellCheck(int64_t n, std::span<const double> raw_theta, int r,
                           int c) {
  constexpr double kMinExpectedCount = 5.0;
  internal::RequireShape(
      static_cast<int>(raw_theta.size()) == r + c - 2,
      "independence parameters must have r + c - 2 entries");
  for (double v : raw_theta)
    if (!std::isfinite(v)) return true;
  const std::vector<double> rows =
      internal::CompleteSimplex(raw_theta.subspan(0, r - 1));
  const std::vector<double> cols =
      internal::CompleteSimplex(raw_theta.subspan(r - 1, c - 1));
  for (double v : rows)
    if (v <= 0.0 || v >= 1.0) return true;
  for (double v : cols)
    if (v <= 0.0 || v >= 1.0) return true;
  for (double pr : rows)
    for (double pc : cols)
      if (static_cast<double>(n) * pr * pc <= kMinExpectedCount) return true;
  return false;
}

// Unclamped marginal estimates (row sums / n~, column sums / n~) as the free
// parameter vector. NaN when n~ <= 0.
inline std::vector<double> RawIndependenceEstimate(const NoisyHistogram& nh,
                                                   int r, int c) {
  internal::RequireShape(nh.size() == r * c,
                         "noisy table does not have r * c cells");
  std::vector<double> theta(r + c - 2,
                            std::numeric_limits<double>::quiet_NaN());
  const double total = nh.noisy_total;
  if (!(total > 0.0)) return theta;
  for (int i = 0; i + 1 < r; ++i) {
    double row = 0.0;
    for (int j = 0; j < c; ++j) row += nh.values[i * c + j];
    theta[i] = row / total;
  }
  for (int j = 0; j + 1 < c; ++j) {
    double col = 0.0;
    for (int i = 0; i < r; ++i) col += nh.values[i * c + j];
    theta[r - 1 + j] = col / total;
  }
  return theta;
}

// Independence of the row and column variables of an r x c table:
// p(pi1, pi2) = pi1 pi2', theta = (pi1_1..pi1_{r-1}, pi2_1..pi2_{c-1}),
// flattened row-major.
inline ParametricModel IndependenceModel(int r, int c) {
  internal::Require(r >= 2 && c >= 2,
                    "independence model needs r >= 2 and c >= 2");
  ParametricModel model;
  model.d = r * c;
  model.k = r + c - 2;
  model.label = "independence " + std::to_string(r) + "x" + std::to_string(c);
  model.prob_map = [r, c](std::span<const double> theta) {
    const std::vector<double> rows =
        internal::CompleteSimplex(theta.subspan(0, r - 1));
    const std::vector<double> cols =
        internal::CompleteSimplex(theta.subspan(r - 1, c - 1));
    std::vector<double> p(static_cast<size_t>(r) * c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) p[i * c + j] = rows[i] * cols[j];
    return p;
  };
  model.project = [r, c](std::span<const double> theta) {
    std::vector<double> out(theta.begin(), theta.end());
    internal::ProjectSimplexBlock(std::span<double>(out).subspan(0, r - 1));
    internal::ProjectSimplexBlock(std::span<double>(out).subspan(r - 1, c - 1));
    return out;
  };
  model.naive_estimator = [r, c](const NoisyHistogram& nh) {
    const std::vector<double> raw = RawIndependenceEstimate(nh, r, c);
    NaiveEstimate est;
    est.inconclusive = SmallCellCheck(nh.n, raw, r, c);
    if (!std::isfinite(raw.front())) {
      // No usable total; fall back to uniform marginals.
      est.theta.assign(r - 1, 1.0 / r);
      est.theta.insert(est.theta.end(), c - 1, 1.0 / c);
      return est;
    }
    // Clamp every marginal (including the implied last entry) into
    // [floor, 1 - floor], then renormalize each margin.
    std::vector<double> rows =
        internal::CompleteSimplex(std::span<const double>(raw).subspan(0, r - 1));
    std::vector<double> cols = internal::CompleteSimplex(
        std::span<const double>(raw).subspan(r - 1, c - 1));
    auto clamp_and_normalize = [](std::vector<double>& v) {
      double sum = 0.0;
      for (double& x : v) {
        x = std::clamp(x, kMarginalFloor, 1.0 - kMarginalFloor);
        sum += x;
      }
      for (double& x : v) x /= sum;
    };
    clamp_and_normalize(rows);
    clamp_and_normalize(cols);
    est.theta.assign(rows.begin(), rows.end() - 1);
    est.theta.insert(est.theta.end(), cols.begin(), cols.end() - 1);
    return est;
  };
  return model;
}

// T(theta) with the middle matrix frozen at a given plug-in probability
// vector.
class MinChiObjective {
 public:
  MinChiObjective(const NoisyHistogram& nh, const ParametricModel& model,
                  std::vector<double> p_middle, StatisticKind kind)
      : nh_(nh),
        model_(model),
        p_middle_(std::move(p_middle)),
        kind_(kind),
        scaled_variance_(nh.noise_variance / static_cast<double>(nh.n)) {}

  double operator()(std::span<const double> theta) const {
    const std::vector<double> p = model_.prob_map(theta);
    const std::vector<double> u = CenteredVector(nh_, p);
    return internal::ClosedFormStatistic(u, p_middle_, scaled_variance_,
                                         kind_);
  }

  const std::vector<double>& p_middle() const { return p_middle_; }

 private:
  const NoisyHistogram& nh_;
  const ParametricModel& model_;
  std::vector<double> p_middle_;
  StatisticKind kind_;
  double scaled_variance_;
};

namespace internal {

inline void CheckModel(const ParametricModel& model, const NoisyHistogram& nh) {
  RequireShape(model.d == nh.size(),
               "model has " + std::to_string(model.d) +
                   " cells but the histogram has " + std::to_string(nh.size()));
  Require(model.k >= 0 && model.k < model.d, "model must satisfy 0 <= k < d");
  CheckNoisy(nh);
}

inline int MinChiDegreesOfFreedom(const ParametricModel& model,
                                  StatisticKind kind) {
  const int df = model.d - model.k - (kind == StatisticKind::kProjected ? 1 : 0);
  Require(df >= 1, "model leaves no degrees of freedom");
  return df;
}

}  // namespace internal

// T(theta) for one theta, with the middle matrix at p(phi(X~)).
inline double GeneralStatistic(const NoisyHistogram& nh,
                               const ParametricModel& model,
                               std::span<const double> theta,
                               StatisticKind kind) {
  internal::CheckModel(model, nh);
  const NaiveEstimate est = model.naive_estimator(nh);
  const MinChiObjective objective(nh, model, model.prob_map(est.theta), kind);
  return objective(theta);
}

inline MinimizationResult MinimizeObjective(const MinChiObjective& objective,
                                            const ParametricModel& model,
                                            std::vector<double> start,
                                            const NelderMeadOptions& options =
                                                {}) {
  const NelderMeadResult nm = NelderMeadMinimize(
      [&](const std::vector<double>& theta) { return objective(theta); },
      std::move(start),
      [&](const std::vector<double>& theta) { return model.project(theta); },
      options);
  MinimizationResult result;
  result.theta_hat = nm.x;
  result.value = nm.value;
  result.iterations = nm.iterations;
  result.converged = nm.converged;
  return result;
}

// argmin_theta T(theta) by Nelder-Mead started at the clamped naive estimate.
inline MinimizationResult MinimizeStatistic(const NoisyHistogram& nh,
                                            const ParametricModel& model,
                                            StatisticKind kind,
                                            const NelderMeadOptions& options =
                                                {}) {
  internal::CheckModel(model, nh);
  const NaiveEstimate est = model.naive_estimator(nh);
  const MinChiObjective objective(nh, model, model.prob_map(est.theta), kind);
  return MinimizeObjective(objective, model, est.theta, options);
}

// Decision for an already-noisy histogram against the asymptotic threshold.
inline TestReport MinChi2Decide(const NoisyHistogram& nh, double alpha,
                                const ParametricModel& model,
                                StatisticKind kind) {
  internal::CheckAlpha(alpha);
  internal::CheckModel(model, nh);
  const NaiveEstimate est = model.naive_estimator(nh);
  const MinChiObjective objective(nh, model, model.prob_map(est.theta), kind);
  const MinimizationResult fit = MinimizeObjective(objective, model, est.theta);

  TestReport report;
  report.alpha = alpha;
  report.statistic.kind = kind;
  report.statistic.value = fit.value;
  report.statistic.df = internal::MinChiDegreesOfFreedom(model, kind);
  report.statistic.centered = CenteredVector(nh, model.prob_map(fit.theta_hat));
  report.theta_hat = fit.theta_hat;
  report.converged = fit.converged;
  report.threshold = Chi2Quantile(report.statistic.df, 1.0 - alpha);
  if (est.inconclusive) {
    report.decision = Decision::kInconclusive;
  } else {
    report.decision = fit.value > report.threshold ? Decision::kReject
                                                   : Decision::kFailToReject;
  }
  return report;
}

// rho-zCDP minimum chi-square test.
inline TestReport ZcdpMinChi2Test(const Histogram& h, double rho, double alpha,
                                  const ParametricModel& model,
                                  StatisticKind kind, RngStream& rng) {
  internal::CheckAlpha(alpha);
  const NoisyHistogram nh = GaussianMechanism(h, rho, rng);
  return MinChi2Decide(nh, alpha, model, kind);
}

// epsilon-DP minimum chi-square test with a Monte Carlo critical value.
// Replicate j draws X* ~ Multinomial(n, p(theta_hat)) and fresh Laplace noise
// from rng.Split(j) and, by default, re-runs the whole estimation pipeline.
inline TestReport DpMcMinTest(const Histogram& h, double epsilon, double alpha,
                              const ParametricModel& model, StatisticKind kind,
                              const McOptions& options, RngStream& rng) {
  internal::CheckAlpha(alpha);
  internal::CheckMcSamples(options.samples, alpha);
  const double assumed =
      options.assumed_noise_variance.value_or(LaplaceNoiseVariance(epsilon));
  internal::Require(assumed > 0.0, "assumed noise variance must be positive");

  NoisyHistogram nh = LaplaceMechanism(h, epsilon, rng);
  nh.noise_variance = assumed;
  internal::CheckModel(model, nh);

  const NaiveEstimate est = model.naive_estimator(nh);
  const MinChiObjective objective(nh, model, model.prob_map(est.theta), kind);
  const MinimizationResult fit = MinimizeObjective(objective, model, est.theta);

  TestReport report;
  report.alpha = alpha;
  report.statistic.kind = kind;
  report.statistic.value = fit.value;
  report.statistic.df = internal::MinChiDegreesOfFreedom(model, kind);
  report.statistic.centered = CenteredVector(nh, model.prob_map(fit.theta_hat));
  report.theta_hat = fit.theta_hat;
  report.converged = fit.converged;
  if (est.inconclusive) {
    report.decision = Decision::kInconclusive;
    report.threshold = std::numeric_limits<double>::quiet_NaN();
    report.mc_samples_used = 0;
    return report;
  }

  const std::vector<double> p_hat = model.prob_map(fit.theta_hat);
  std::vector<double> replicates(options.samples);
  for (int j = 0; j < options.samples; ++j) {
    RngStream child = rng.Split(static_cast<uint64_t>(j));
    const Histogram star = SampleMultinomial(nh.n, p_hat, child);
    NoisyHistogram nh_star = LaplaceMechanism(star, epsilon, child);
    nh_star.noise_variance = assumed;
    const NaiveEstimate est_star = model.naive_estimator(nh_star);
    const MinChiObjective obj_star(nh_star, model,
                                   model.prob_map(est_star.theta), kind);
    if (options.freeze_theta) {
      replicates[j] = obj_star(fit.theta_hat);
    } else {
      const MinimizationResult refit =
          MinimizeObjective(obj_star, model, est_star.theta);
      if (!refit.converged) ++report.replicate_failures;
      replicates[j] = refit.value;
    }
  }
  report.threshold = McCriticalValue(replicates, alpha);
  report.mc_samples_used = options.samples;
  report.decision = report.statistic.value > report.threshold
                        ? Decision::kReject
                        : Decision::kFailToReject;
  return report;
}

}  // namespace dpchi

#endif  // DPCHI_MINCHI_H_
