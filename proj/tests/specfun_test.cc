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

#include "dpchi/specfun.h"

#include <cmath>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "gtest/gtest.h"

namespace dpchi {
namespace {

TEST(RegularizedGammaTest, MatchesBoostOnGrid) {
  for (double a : {0.5, 1.0, 1.5, 2.0, 3.5, 10.0, 50.0, 200.0}) {
    for (double x : {1e-6, 0.01, 0.3, 1.0, 2.5, 7.0, 20.0, 60.0, 250.0}) {
      const double lower = boost::math::gamma_p(a, x);
      const double upper = boost::math::gamma_q(a, x);
      EXPECT_NEAR(RegLowerGamma(a, x), lower, 1e-13 + 1e-11 * lower)
          << "a=" << a << " x=" << x;
      EXPECT_NEAR(RegUpperGamma(a, x), upper, 1e-13 + 1e-11 * upper)
          << "a=" << a << " x=" << x;
    }
  }
}

TEST(RegularizedGammaTest, Boundaries) {
  EXPECT_EQ(RegLowerGamma(2.0, 0.0), 0.0);
  EXPECT_EQ(RegUpperGamma(2.0, 0.0), 1.0);
  EXPECT_THROW(RegLowerGamma(0.0, 1.0), DomainError);
  EXPECT_THROW(RegLowerGamma(1.0, -1.0), DomainError);
}

TEST(Chi2CdfTest, ExponentialSpecialCase) {
  // chi^2_2 is Exp(1/2).
  for (double x : {0.1, 1.0, 4.0, 15.0})
    EXPECT_NEAR(Chi2Cdf(2, x), 1.0 - std::exp(-x / 2), 1e-14);
}

TEST(Chi2QuantileTest, KnownValue) {
  EXPECT_NEAR(Chi2Quantile(4, 0.95), 9.4877, 1e-3);
  EXPECT_NEAR(Chi2Quantile(3, 0.95), 7.814727903251178, 1e-9);
  EXPECT_NEAR(Chi2Quantile(1, 0.95), 3.841458820694124, 1e-9);
}

TEST(Chi2QuantileTest, MatchesBoostAndInvertsCdf) {
  for (int df : {1, 2, 3, 5, 10, 40}) {
    boost::math::chi_squared_distribution<double> dist(df);
    for (double p : {1e-6, 0.01, 0.05, 0.5, 0.9, 0.95, 0.999, 1 - 1e-9}) {
      const double q = Chi2Quantile(df, p);
      EXPECT_NEAR(q, boost::math::quantile(dist, p), 1e-9 * std::max(1.0, q))
          << "df=" << df << " p=" << p;
      EXPECT_NEAR(Chi2Cdf(df, q), p, 1e-12);
    }
  }
}

TEST(Chi2QuantileTest, RejectsBadProbability) {
  EXPECT_THROW(Chi2Quantile(3, 0.0), DomainError);
  EXPECT_THROW(Chi2Quantile(3, 1.0), DomainError);
  EXPECT_THROW(Chi2Quantile(ChiSquareSpec(3, 1.0), 0.5), DomainError);
}

TEST(NoncentralTest, MatchesBoost) {
  for (int df : {1, 3, 4, 10}) {
    for (double ncp : {0.01, 0.5, 3.0, 17.0, 120.0}) {
      boost::math::non_central_chi_squared_distribution<double> dist(df, ncp);
      for (double x : {0.2, 2.0, 7.8, 20.0, 60.0, 200.0}) {
        const double cdf = boost::math::cdf(dist, x);
        const double sf = boost::math::cdf(boost::math::complement(dist, x));
        EXPECT_NEAR(Chi2Cdf(ChiSquareSpec(df, ncp), x), cdf, 1e-10)
            << df << " " << ncp << " " << x;
        EXPECT_NEAR(Chi2Survival(ChiSquareSpec(df, ncp), x), sf,
                    1e-10 + 1e-8 * sf)
            << df << " " << ncp << " " << x;
      }
    }
  }
}

TEST(NoncentralTest, ZeroNcpEqualsCentral) {
  EXPECT_EQ(Chi2Cdf(ChiSquareSpec(3, 0.0), 4.0), Chi2Cdf(3, 4.0));
}

TEST(NoncentralTest, MonotoneInNcp) {
  double prev = 1.0;
  for (double ncp = 0.5; ncp < 40.0; ncp += 0.5) {
    const double cdf = Chi2Cdf(ChiSquareSpec(3, ncp), 7.81);
    EXPECT_LT(cdf, prev);
    prev = cdf;
  }
}

TEST(ChiSquareSpecTest, ValidatesArguments) {
  EXPECT_THROW(ChiSquareSpec(0), DomainError);
  EXPECT_THROW(ChiSquareSpec(2, -1.0), DomainError);
}

}  // namespace
}  // namespace dpchi
