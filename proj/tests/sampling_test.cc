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

#include "dpchi/sampling.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "gtest/gtest.h"

namespace dpchi {
namespace {

TEST(SampleMultinomialTest, CountsSumToN) {
  RngStream rng(1, 0);
  const std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
  for (int64_t n : {0, 1, 7, 1000, 123457}) {
    const Histogram h = SampleMultinomial(n, p, rng);
    EXPECT_EQ(h.Total(), n);
    for (int64_t c : h.counts) EXPECT_GE(c, 0);
  }
}

TEST(SampleMultinomialTest, CellMeansAndVariances) {
  RngStream rng(2, 0);
  const std::vector<double> p = {0.5, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  const int64_t n = 1000;
  const int reps = 20000;
  std::vector<double> sum(4, 0.0);
  std::vector<double> sum_sq(4, 0.0);
  double cross = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Histogram h = SampleMultinomial(n, p, rng);
    for (int i = 0; i < 4; ++i) {
      sum[i] += h.counts[i];
      sum_sq[i] += static_cast<double>(h.counts[i]) * h.counts[i];
    }
    cross += static_cast<double>(h.counts[0]) * h.counts[1];
  }
  for (int i = 0; i < 4; ++i) {
    const double mean = sum[i] / reps;
    const double var = sum_sq[i] / reps - mean * mean;
    const double expected_var = n * p[i] * (1 - p[i]);
    EXPECT_NEAR(mean, n * p[i], 5 * std::sqrt(expected_var / reps));
    EXPECT_NEAR(var / expected_var, 1.0, 0.05);
  }
  const double cov =
      cross / reps - (sum[0] / reps) * (sum[1] / reps);
  EXPECT_NEAR(cov / (-n * p[0] * p[1]), 1.0, 0.08);
}

TEST(SampleMultinomialTest, ZeroProbabilityCellStaysEmpty) {
  RngStream rng(3, 0);
  const std::vector<double> p = {0.5, 0.0, 0.5};
  for (int i = 0; i < 100; ++i)
    EXPECT_EQ(SampleMultinomial(100, p, rng).counts[1], 0);
}

TEST(SampleMultinomialTest, RejectsInvalidInput) {
  RngStream rng(0, 0);
  const std::vector<double> bad = {0.5, 0.6};
  EXPECT_THROW(SampleMultinomial(10, bad, rng), DomainError);
  const std::vector<double> good = {0.5, 0.5};
  EXPECT_THROW(SampleMultinomial(-1, good, rng), DomainError);
}

TEST(SampleLaplaceTest, MeanVarianceAndAbsoluteMean) {
  RngStream rng(4, 0);
  const double b = 3.0;
  const int n = 400000;
  double sum = 0.0;
  double sum_sq = 0.0;
  double sum_abs = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = SampleLaplace(b, rng);
    sum += x;
    sum_sq += x * x;
    sum_abs += std::fabs(x);
  }
  EXPECT_NEAR(sum / n, 0.0, 5 * std::sqrt(2 * b * b / n));
  EXPECT_NEAR(sum_sq / n / (2 * b * b), 1.0, 0.03);
  EXPECT_NEAR(sum_abs / n, b, 0.02);
}

TEST(SampleStandardNormalTest, Moments) {
  RngStream rng(5, 0);
  const int n = 400000;
  double sum = 0.0;
  double sum_sq = 0.0;
  double sum_4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = SampleStandardNormal(rng);
    sum += z;
    sum_sq += z * z;
    sum_4 += z * z * z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(sum_sq / n, 1.0, 5 * std::sqrt(2.0 / n));
  EXPECT_NEAR(sum_4 / n, 3.0, 0.06);
}

}  // namespace
}  // namespace dpchi
