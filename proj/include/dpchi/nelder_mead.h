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

#ifndef DPCHI_NELDER_MEAD_H_
#define DPCHI_NELDER_MEAD_H_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

namespace dpchi {

struct NelderMeadOptions {
  double initial_step = 0.02;
  // Converged once every vertex lies within this distance of the best one.
  double diameter_tolerance = 1e-10;
  int max_evaluations = 10'000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimization. Every trial point is passed through
// `project` before evaluation, so the search never leaves the feasible set;
// the simplex keeps the projected points.
template <typename Objective, typename Projection>
NelderMeadResult NelderMeadMinimize(Objective&& f, std::vector<double> start,
                                    Projection&& project,
                                    const NelderMeadOptions& options = {}) {
  constexpr double kReflect = 1.0;
  constexpr double kExpand = 2.0;
  constexpr double kContract = 0.5;
  constexpr double kShrink = 0.5;

  NelderMeadResult result;
  const size_t k = start.size();
  start = project(start);
  if (k == 0) {
    result.x = start;
    result.value = f(start);
    result.evaluations = 1;
    result.converged = true;
    return result;
  }

  int evaluations = 0;
  auto evaluate = [&](const std::vector<double>& x) {
    ++evaluations;
    return f(x);
  };

  std::vector<std::vector<double>> simplex(k + 1, start);
  std::vector<double> values(k + 1);
  values[0] = evaluate(simplex[0]);
  for (size_t i = 0; i < k; ++i) {
    std::vector<double> vertex = start;
    vertex[i] += options.initial_step;
    vertex = project(vertex);
    // Stepping past an upper bound collapses onto the start; go the other way.
    if (vertex == start) {
      vertex = start;
      vertex[i] -= options.initial_step;
      vertex = project(vertex);
    }
    simplex[i + 1] = std::move(vertex);
    values[i + 1] = evaluate(simplex[i + 1]);
  }

  std::vector<size_t> order(k + 1);
  auto along = [&](const std::vector<double>& from,
                   const std::vector<double>& to, double t) {
    std::vector<double> x(k);
    for (size_t j = 0; j < k; ++j) x[j] = from[j] + t * (to[j] - from[j]);
    return project(x);
  };

  int iterations = 0;
  bool converged = false;
  while (true) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    const size_t best = order.front();
    const size_t worst = order.back();
    const size_t second_worst = order[k - 1];

    double diameter = 0.0;
    for (size_t i = 0; i <= k; ++i) {
      double dist2 = 0.0;
      for (size_t j = 0; j < k; ++j) {
        const double diff = simplex[i][j] - simplex[best][j];
        dist2 += diff * diff;
      }
      diameter = std::max(diameter, std::sqrt(dist2));
    }
    if (diameter < options.diameter_tolerance) {
      converged = true;
      break;
    }
    if (evaluations >= options.max_evaluations) break;
    ++iterations;

    std::vector<double> centroid(k, 0.0);
    for (size_t i = 0; i <= k; ++i) {
      if (i == worst) continue;
      for (size_t j = 0; j < k; ++j) centroid[j] += simplex[i][j] / k;
    }

    const std::vector<double> reflected =
        along(centroid, simplex[worst], -kReflect);
    const double f_reflected = evaluate(reflected);
    if (f_reflected < values[best]) {
      const std::vector<double> expanded =
          along(centroid, simplex[worst], -kExpand);
      const double f_expanded = evaluate(expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    // Contract toward the better of the worst vertex and its reflection.
    const bool outside = f_reflected < values[worst];
    const std::vector<double> contracted =
        outside ? along(centroid, reflected, kContract)
                : along(centroid, simplex[worst], kContract);
    const double f_contracted = evaluate(contracted);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (size_t i = 0; i <= k; ++i) {
      if (i == best) continue;
      simplex[i] = along(simplex[best], simplex[i], kShrink);
      values[i] = evaluate(simplex[i]);
    }
  }

  const size_t best = static_cast<size_t>(
      std::min_element(values.begin(), values.end()) - values.begin());
  result.x = simplex[best];
  result.value = values[best];
  result.evaluations = evaluations;
  result.iterations = iterations;
  result.converged = converged;
  return result;
}

}  // namespace dpchi

#endif  // DPCHI_NELDER_MEAD_H_
