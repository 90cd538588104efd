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

// Runs the zCDP goodness-of-fit test on one simulated histogram and prints
// both statistics.

#include <cstdio>
#include <vector>

#include "dpchi/gof.h"
#include "dpchi/mechanisms.h"
#include "dpchi/rng.h"
#include "dpchi/sampling.h"

int main() {
  const std::vector<double> p0 = {1.0 / 2, 1.0 / 6, 1.0 / 6, 1.0 / 6};
  const std::vector<double> p1 = {0.51, 0.5 / 3, 0.5 / 3, 0.5 / 3 - 0.01};
  const double rho = 0.001;

  dpchi::RngStream rng(/*master_seed=*/42, /*stream_id=*/0);
  const dpchi::Histogram h = dpchi::SampleMultinomial(100000, p1, rng);
  const dpchi::NoisyHistogram nh = dpchi::GaussianMechanism(h, rho, rng);

  for (auto kind : {dpchi::StatisticKind::kUnprojected,
                    dpchi::StatisticKind::kProjected}) {
    const dpchi::TestReport r = dpchi::ZcdpGofDecide(nh, p0, 0.05, kind);
    std::printf("%-11s Q=%9.4f  threshold=%7.4f  df=%d  %s\n",
                kind == dpchi::StatisticKind::kProjected ? "projected"
                                                         : "unprojected",
                r.statistic.value, r.threshold, r.statistic.df,
                dpchi::DecisionName(r.decision));
  }
  return 0;
}
