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

#include "dpchi/minchi.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dpchi/gof.h"
#include "dpchi/mechanisms.h"
#include "dpchi/rng.h"
#include "dpchi/sampling.h"
#include "gtest/gtest.h"

namespace dpchi {
namespace {

const std::vector<double> kP0 = {0.5, 1.0 / 6, 1.0 / 6, 1.0 / 6};
const std::vector<double> kIndepNull = {1.0 / 3, 1.0 / 3, 1.0 / 6, 1.0 / 6};

TEST(ConstantModelTest, ZcdpMatchesGofBitForBit) {
  const ParametricModel model = ConstantModel(kP0);
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RngStream data(seed, 1);
    const Histogram h = SampleMultinomial(20000, kP0, data);
    for (auto kind : {StatisticKind::kProjected, StatisticKind::kUnprojected}) {
      RngStream a(seed, 2);
      RngStream b(seed, 2);
      const TestReport gof = ZcdpGofTest(h, 0.001, 0.05, kP0, kind, a);
      const TestReport min = ZcdpMinChi2Test(h, 0.001, 0.05, model, kind, b);
      EXPECT_EQ(gof.statistic.value, min.statistic.value);
      EXPECT_EQ(gof.statistic.df, min.statistic.df);
      EXPECT_EQ(gof.threshold, min.threshold);
      EXPECT_EQ(gof.decision, min.decision);
    }
  }
}

TEST(ConstantModelTest, MonteCarloMatchesGofBitForBit) {
  const ParametricModel model = ConstantModel(kP0);
  McOptions options;
  for (uint64_t seed = 0; seed < 5; ++seed) {
    RngStream data(seed, 1);
    const Histogram h = SampleMultinomial(20000, kP0, data);
    RngStream a(seed, 3);
    RngStream b(seed, 3);
    const TestReport gof = DpMcGofTest(h, 0.0447, 0.05, kP0,
                                       StatisticKind::kProjected, options, a);
    const TestReport min = DpMcMinTest(h, 0.0447, 0.05, model,
                                       StatisticKind::kProjected, options, b);
    EXPECT_EQ(gof.statistic.value, min.statistic.value);
    EXPECT_EQ(gof.threshold, min.threshold);
    EXPECT_EQ(gof.decision, min.decision);
  }
}

TEST(IndependenceModelTest, ShapeAndProbabilityMap) {
  const ParametricModel model = IndependenceModel(2, 2);
  EXPECT_EQ(model.d, 4);
  EXPECT_EQ(model.k, 2);
  const std::vector<double> theta = {2.0 / 3, 0.5};
  const std::vector<double> p = model.prob_map(theta);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[i], kIndepNull[i], 1e-15);

  const ParametricModel m32 = IndependenceModel(3, 2);
  EXPECT_EQ(m32.d, 6);
  EXPECT_EQ(m32.k, 3);
  const std::vector<double> p32 = m32.prob_map(std::vector<double>{0.2, 0.3, 0.6});
  EXPECT_NEAR(p32[0], 0.2 * 0.6, 1e-15);
  EXPECT_NEAR(p32[5], 0.5 * 0.4, 1e-15);
  EXPECT_THROW(IndependenceModel(1, 3), DomainError);
}

TEST(IndependenceModelTest, DegreesOfFreedom) {
  const ParametricModel model = IndependenceModel(2, 2);
  NoisyHistogram nh = MakeNoisyHistogram({33333, 33333, 16667, 16667}, 100000,
                                         1000.0, NoiseMechanism::kGaussian);
  EXPECT_EQ(MinChi2Decide(nh, 0.05, model, StatisticKind::kProjected)
                .statistic.df,
            1);
  EXPECT_EQ(MinChi2Decide(nh, 0.05, model, StatisticKind::kUnprojected)
                .statistic.df,
            2);
}

TEST(IndependenceModelTest, ProjectionKeepsMarginalsFeasible) {
  const ParametricModel model = IndependenceModel(3, 3);
  const std::vector<double> out =
      model.project(std::vector<double>{-0.5, 1.7, 0.9, 0.9});
  for (double v : out) {
    EXPECT_GE(v, kMarginalFloor);
    EXPECT_LE(v, 1 - kMarginalFloor);
  }
  EXPECT_LE(out[0] + out[1], 1 - kMarginalFloor + 1e-15);
  EXPECT_LE(out[2] + out[3], 1 - kMarginalFloor + 1e-15);
  for (double v : model.prob_map(out)) EXPECT_GT(v, 0.0);
}

TEST(SmallCellCheckTest, Rules) {
  const std::vector<double> good = {2.0 / 3, 0.5};
  EXPECT_FALSE(SmallCellCheck(100000, good, 2, 2));
  // n * (1/2) * (1/2) = 5 exactly counts as small.
  const std::vector<double> even = {0.5, 0.5};
  EXPECT_TRUE(SmallCellCheck(20, even, 2, 2));
  EXPECT_FALSE(SmallCellCheck(21, even, 2, 2));
  EXPECT_TRUE(SmallCellCheck(1000, std::vector<double>{1.1, 0.5}, 2, 2));
  EXPECT_TRUE(SmallCellCheck(1000, std::vector<double>{0.0, 0.5}, 2, 2));
  EXPECT_TRUE(SmallCellCheck(
      1000, std::vector<double>{std::numeric_limits<double>::quiet_NaN(), 0.5},
      2, 2));
}

TEST(IndependenceModelTest, NaiveEstimatorClampsAndFlags) {
  const ParametricModel model = IndependenceModel(2, 2);
  // Row 2 has a negative noisy sum.
  NoisyHistogram nh = MakeNoisyHistogram({60.0, 50.0, -20.0, -5.0}, 100, 1000.0,
                                         NoiseMechanism::kGaussian);
  const NaiveEstimate est = model.naive_estimator(nh);
  EXPECT_TRUE(est.inconclusive);
  EXPECT_GE(est.theta[0], kMarginalFloor);
  EXPECT_LE(est.theta[0], 1 - kMarginalFloor);

  NoisyHistogram empty = MakeNoisyHistogram({-10.0, 2.0, 3.0, 1.0}, 100,
                                            1000.0, NoiseMechanism::kGaussian);
  const NaiveEstimate fallback = model.naive_estimator(empty);
  EXPECT_TRUE(fallback.inconclusive);
  EXPECT_DOUBLE_EQ(fallback.theta[0], 0.5);
  EXPECT_DOUBLE_EQ(fallback.theta[1], 0.5);

  const TestReport r =
      MinChi2Decide(empty, 0.05, model, StatisticKind::kProjected);
  EXPECT_EQ(r.decision, Decision::kInconclusive);
}

// U' M U with M the explicitly inverted (projected) middle matrix at p_mid.
double ExplicitForm(const NoisyHistogram& nh, const std::vector<double>& p,
                    const std::vector<double>& p_mid, bool projected) {
  const int d = static_cast<int>(p.size());
  const double n = static_cast<double>(nh.n);
  const double s = nh.noise_variance / n;
  Eigen::MatrixXd sigma(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      sigma(i, j) = (i == j ? p_mid[i] + s : 0.0) - p_mid[i] * p_mid[j];
  Eigen::MatrixXd m = sigma.inverse();
  if (projected) {
    const Eigen::MatrixXd proj =
        Eigen::MatrixXd::Identity(d, d) - Eigen::MatrixXd::Ones(d, d) / d;
    m = proj * m * proj;
  }
  Eigen::VectorXd u(d);
  for (int i = 0; i < d; ++i) u(i) = std::sqrt(n) * (nh.values[i] / n - p[i]);
  return u.dot(m * u);
}

TEST(GeneralStatisticTest, MatchesExplicitQuadraticForm) {
  const ParametricModel model = IndependenceModel(2, 3);
  RngStream rng(41, 0);
  const std::vector<double> p = model.prob_map(std::vector<double>{0.4, 0.2, 0.3});
  for (int trial = 0; trial < 50; ++trial) {
    const Histogram h = SampleMultinomial(30000, p, rng);
    const NoisyHistogram nh = GaussianMechanism(h, 0.001, rng);
    const std::vector<double> theta = {0.35 + 0.1 * rng.Uniform(), 0.2, 0.3};
    const std::vector<double> p_mid =
        model.prob_map(model.naive_estimator(nh).theta);
    for (auto kind : {StatisticKind::kProjected, StatisticKind::kUnprojected}) {
      const double value = GeneralStatistic(nh, model, theta, kind);
      const double oracle = ExplicitForm(nh, model.prob_map(theta), p_mid,
                                         kind == StatisticKind::kProjected);
      EXPECT_NEAR(value, oracle, 1e-8 * std::max(1.0, std::fabs(oracle)));
    }
  }
}

// Multi-start cyclic golden-section search over the feasible box, used as an
// independent minimizer.
double GoldenOracle(const MinChiObjective& f, int k) {
  const double lo = 1e-3;
  const double hi = 1 - 1e-3;
  double best = std::numeric_limits<double>::infinity();
  const double phi = (std::sqrt(5.0) - 1) / 2;
  for (double s0 : {0.2, 0.5, 0.8}) {
    std::vector<double> x(k, s0);
    for (int sweep = 0; sweep < 60; ++sweep) {
      for (int c = 0; c < k; ++c) {
        double a = lo;
        double b = hi;
        for (int it = 0; it < 80; ++it) {
          const double x1 = b - phi * (b - a);
          const double x2 = a + phi * (b - a);
          std::vector<double> y1 = x;
          std::vector<double> y2 = x;
          y1[c] = x1;
          y2[c] = x2;
          if (f(y1) < f(y2)) {
            b = x2;
          } else {
            a = x1;
          }
        }
        x[c] = 0.5 * (a + b);
      }
    }
    best = std::min(best, f(x));
  }
  return best;
}

TEST(MinimizeStatisticTest, AgreesWithIndependentMinimizer) {
  const ParametricModel model = IndependenceModel(2, 2);
  RngStream rng(42, 0);
  std::vector<double> p = kIndepNull;
  p[0] += 0.01;
  p[2] -= 0.01;
  for (int trial = 0; trial < 20; ++trial) {
    const Histogram h = SampleMultinomial(50000, p, rng);
    const NoisyHistogram nh = GaussianMechanism(h, 0.001, rng);
    for (auto kind : {StatisticKind::kProjected, StatisticKind::kUnprojected}) {
      const MinimizationResult r = MinimizeStatistic(nh, model, kind);
      const MinChiObjective objective(
          nh, model, model.prob_map(model.naive_estimator(nh).theta), kind);
      const double oracle = GoldenOracle(objective, 2);
      EXPECT_TRUE(r.converged);
      EXPECT_NEAR(r.value, oracle, 1e-6 * std::max(1.0, oracle));
      EXPECT_LE(r.value, oracle + 1e-9);
    }
  }
}

TEST(ZcdpMinChi2Test, IndependenceTypeIError) {
  const ParametricModel model = IndependenceModel(2, 2);
  RngStream master(43, 0);
  const int trials = 2000;
  int rejections = 0;
  for (int t = 0; t < trials; ++t) {
    RngStream rng = master.Split(t);
    const Histogram h = SampleMultinomial(100000, kIndepNull, rng);
    rejections += ZcdpMinChi2Test(h, 0.001, 0.05, model,
                                  StatisticKind::kProjected, rng)
                      .decision == Decision::kReject;
  }
  EXPECT_LT(static_cast<double>(rejections) / trials,
            0.05 + 3 * std::sqrt(0.05 * 0.95 / trials));
}

TEST(DpMcMinTest, FrozenAndRefitBothRun) {
  const ParametricModel model = IndependenceModel(2, 2);
  const Histogram h{{33400, 33300, 16600, 16700}};
  McOptions options;
  RngStream a(7, 0);
  const TestReport refit =
      DpMcMinTest(h, 0.0447, 0.05, model, StatisticKind::kProjected, options, a);
  options.freeze_theta = true;
  RngStream b(7, 0);
  const TestReport frozen =
      DpMcMinTest(h, 0.0447, 0.05, model, StatisticKind::kProjected, options, b);
  EXPECT_EQ(refit.statistic.value, frozen.statistic.value);
  EXPECT_EQ(refit.mc_samples_used, 59);
  EXPECT_EQ(refit.replicate_failures, 0);
  // Fixing theta can only raise each replicate's value.
  EXPECT_GE(frozen.threshold, refit.threshold - 1e-9);
}

TEST(DpMcMinTest, InconclusiveSkipsReplicates) {
  const ParametricModel model = IndependenceModel(2, 2);
  const Histogram h{{3, 4, 1, 2}};
  McOptions options;
  RngStream rng(8, 0);
  const TestReport r =
      DpMcMinTest(h, 0.0447, 0.05, model, StatisticKind::kProjected, options, rng);
  EXPECT_EQ(r.decision, Decision::kInconclusive);
  EXPECT_EQ(r.mc_samples_used, 0);
}

TEST(ModelValidationTest, ShapeMismatch) {
  const ParametricModel model = IndependenceModel(2, 3);
  const NoisyHistogram nh = MakeNoisyHistogram({1, 2, 3, 4}, 10, 1.0,
                                               NoiseMechanism::kGaussian);
  EXPECT_THROW(MinChi2Decide(nh, 0.05, model, StatisticKind::kProjected),
               ShapeError);
}

}  // namespace
}  // namespace dpchi
