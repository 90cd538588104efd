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

#ifndef DPCHI_HISTOGRAM_H_
#define DPCHI_HISTOGRAM_H_

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpchi/errors.h"

namespace dpchi {

// Raw cell counts of a categorical sample.
struct Histogram {
  std::vector<int64_t> counts;

  int64_t Total() const {
    return std::accumulate(counts.begin(), counts.end(), int64_t{0});
  }
  int size() const { return static_cast<int>(counts.size()); }
};

// An r x c table of counts stored row-major, i.e. the canonical vector order
// runs left to right along each row.
struct ContingencyTable {
  int rows = 0;
  int cols = 0;
  std::vector<int64_t> counts;

  ContingencyTable() = default;
  ContingencyTable(int r, int c, std::vector<int64_t> cells)
      : rows(r), cols(c), counts(std::move(cells)) {
    internal::RequireShape(
        r >= 1 && c >= 1 && counts.size() == static_cast<size_t>(r) * c,
        "table cell count does not match its " + std::to_string(r) + "x" +
            std::to_string(c) + " shape");
  }

  int64_t at(int i, int j) const { return counts[i * cols + j]; }
  int64_t RowSum(int i) const {
    int64_t s = 0;
    for (int j = 0; j < cols; ++j) s += at(i, j);
    return s;
  }
  int64_t ColSum(int j) const {
    int64_t s = 0;
    for (int i = 0; i < rows; ++i) s += at(i, j);
    return s;
  }
  int64_t Total() const {
    return std::accumulate(counts.begin(), counts.end(), int64_t{0});
  }
  Histogram Flatten() const { return Histogram{counts}; }
};

enum class NoiseMechanism { kGaussian, kLaplace };

// A privatized histogram X + Z together with what a test needs to know about
// the noise. `realized_noise` is only kept in simulation and test code.
struct NoisyHistogram {
  std::vector<double> values;
  int64_t n = 0;
  double noisy_total = 0.0;
  double noise_variance = 0.0;
  NoiseMechanism mechanism = NoiseMechanism::kGaussian;
  std::optional<std::vector<double>> realized_noise;

  int size() const { return static_cast<int>(values.size()); }
};

// Builds a NoisyHistogram from already-noisy values (e.g. a released vector
// read back from disk). The total is recomputed from the values.
inline NoisyHistogram MakeNoisyHistogram(std::vector<double> values, int64_t n,
                                         double noise_variance,
                                         NoiseMechanism mechanism) {
  internal::RequireShape(values.size() >= 2,
                         "a histogram needs at least 2 cells");
  NoisyHistogram out;
  out.noisy_total = std::accumulate(values.begin(), values.end(), 0.0);
  out.values = std::move(values);
  out.n = n;
  out.noise_variance = noise_variance;
  out.mechanism = mechanism;
  return out;
}

enum class BudgetKind { kZcdp, kPureDp };

// Either a zCDP parameter rho or a pure-DP parameter epsilon.
class PrivacyBudget {
 public:
  static PrivacyBudget Zcdp(double rho) {
    internal::Require(rho > 0.0 && std::isfinite(rho),
                      "rho must be finite and positive");
    return PrivacyBudget(BudgetKind::kZcdp, rho);
  }
  static PrivacyBudget PureDp(double epsilon) {
    internal::Require(epsilon > 0.0 && std::isfinite(epsilon),
                      "epsilon must be finite and positive");
    return PrivacyBudget(BudgetKind::kPureDp, epsilon);
  }

  BudgetKind kind() const { return kind_; }
  double rho() const {
    internal::Require(kind_ == BudgetKind::kZcdp, "budget is not zCDP");
    return value_;
  }
  double epsilon() const {
    internal::Require(kind_ == BudgetKind::kPureDp, "budget is not pure DP");
    return value_;
  }

 private:
  PrivacyBudget(BudgetKind kind, double value) : kind_(kind), value_(value) {}

  BudgetKind kind_;
  double value_;
};

namespace internal {

// Probability vectors must be nonnegative and sum to one.
inline void CheckProbabilityVector(std::span<const double> p,
                                   double tolerance = 1e-12) {
  RequireShape(!p.empty(), "probability vector is empty");
  double sum = 0.0;
  for (double v : p) {
    Require(v >= 0.0 && std::isfinite(v),
            "probability vector has a negative or non-finite entry");
    sum += v;
  }
  Require(std::fabs(sum - 1.0) <= tolerance,
          "probability vector does not sum to 1 (sum = " +
              std::to_string(sum) + ")");
}

}  // namespace internal
}  // namespace dpchi

#endif  // DPCHI_HISTOGRAM_H_
