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

#ifndef DPCHI_COVARIANCE_H_
#define DPCHI_COVARIANCE_H_

// Dense matrices of the goodness-of-fit theory, all parameterized by the null
// vector p0 and the scaled noise variance s = v / n (v = per-cell noise
// variance, n = sample size):
//
//   Sigma            = Diag(p0) - p0 p0'              (rank d-1, Sigma 1 = 0)
//   Sigma_s          = Sigma + s I                    (full rank, Sigma_s 1 = s 1)
//   Sigma_s^-1       = Diag(p0 + s)^-1 + w w' / (1 - p0.w),  w_i = p0_i/(p0_i+s)
//   P                = I - 11'/d
//   P Sigma_s^-1 P   = Sigma_s^-1 - (1/(s d)) 11'

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dpchi/errors.h"
#include "dpchi/matrix.h"

namespace dpchi {

namespace internal {

inline void CheckNull(std::span<const double> p0) {
  RequireShape(p0.size() >= 2, "null vector needs at least 2 cells");
  double sum = 0.0;
  for (double v : p0) {
    Require(v > 0.0 && std::isfinite(v),
            "null probabilities must be strictly positive");
    sum += v;
  }
  Require(std::fabs(sum - 1.0) <= 1e-9,
          "null probabilities must sum to 1 (sum = " + std::to_string(sum) +
              ")");
}

inline void CheckScaledVariance(double s) {
  Require(s > 0.0 && std::isfinite(s),
          "scaled noise variance must be finite and positive");
}

}  // namespace internal

// omega_i = p0_i / (p0_i + s).
inline std::vector<double> Omega(std::span<const double> p0, double s) {
  std::vector<double> w(p0.size());
  for (size_t i = 0; i < p0.size(); ++i) w[i] = p0[i] / (p0[i] + s);
  return w;
}

inline Matrix ProjectionMatrix(int d) {
  Matrix m(d, d, -1.0 / d);
  for (int i = 0; i < d; ++i) m(i, i) += 1.0;
  return m;
}

inline Matrix MultinomialCovariance(std::span<const double> p0) {
  internal::CheckNull(p0);
  const int d = static_cast<int>(p0.size());
  Matrix sigma(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      sigma(i, j) = (i == j ? p0[i] : 0.0) - p0[i] * p0[j];
  return sigma;
}

inline Matrix PrivateCovariance(std::span<const double> p0, double s) {
  internal::CheckScaledVariance(s);
  Matrix m = MultinomialCovariance(p0);
  for (int i = 0; i < m.rows(); ++i) m(i, i) += s;
  return m;
}

// Closed-form (Woodbury) inverse of Sigma + s I.
inline Matrix PrivateCovarianceInverse(std::span<const double> p0, double s) {
  internal::CheckNull(p0);
  internal::CheckScaledVariance(s);
  const int d = static_cast<int>(p0.size());
  const std::vector<double> w = Omega(p0, s);
  // 1 - p0.w = s * sum(w), computed in the cancellation-free form.
  double w_sum = 0.0;
  for (double v : w) w_sum += v;
  const double coef = 1.0 / (s * w_sum);
  Matrix inv(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) inv(i, j) = coef * w[i] * w[j];
    inv(i, i) += 1.0 / (p0[i] + s);
  }
  return inv;
}

// P (Sigma + s I)^-1 P. Expanding the Woodbury form with w = 1 - s delta,
// delta_i = 1 / (p0_i + s), removes the O(1/s) terms that cancel under P:
//   Diag(delta) + S / (W d) 11' - (1 delta' + delta 1') / W + s delta delta' / W
// with W = sum(w), S = sum(delta).
inline Matrix ProjectedMiddleMatrix(std::span<const double> p0, double s) {
  internal::CheckNull(p0);
  internal::CheckScaledVariance(s);
  const int d = static_cast<int>(p0.size());
  const std::vector<double> w = Omega(p0, s);
  std::vector<double> delta(d);
  double w_sum = 0.0;
  double delta_sum = 0.0;
  for (int i = 0; i < d; ++i) {
    delta[i] = 1.0 / (p0[i] + s);
    w_sum += w[i];
    delta_sum += delta[i];
  }
  const double constant = delta_sum / (w_sum * d);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      m(i, j) = constant - (delta[i] + delta[j]) / w_sum +
                s * delta[i] * delta[j] / w_sum;
    }
    m(i, i) += delta[i];
  }
  return m;
}

// P Diag(p0)^-1 P, the limit of the projected middle matrix as s -> 0.
inline Matrix ProjectedMiddleLimit(std::span<const double> p0) {
  internal::CheckNull(p0);
  const int d = static_cast<int>(p0.size());
  Matrix diag_inv(d, d);
  for (int i = 0; i < d; ++i) diag_inv(i, i) = 1.0 / p0[i];
  const Matrix proj = ProjectionMatrix(d);
  return proj * diag_inv * proj;
}

// Every matrix of the goodness-of-fit theory for one (p0, s).
struct GofMatrices {
  std::vector<double> p0;
  double scaled_variance = 0.0;
  Matrix sigma;
  Matrix sigma_priv;
  Matrix sigma_priv_inv;
  Matrix projection;
  std::vector<double> omega;

  static GofMatrices Make(std::span<const double> p0, double s) {
    GofMatrices m;
    m.p0.assign(p0.begin(), p0.end());
    m.scaled_variance = s;
    m.sigma = MultinomialCovariance(p0);
    m.sigma_priv = PrivateCovariance(p0, s);
    m.sigma_priv_inv = PrivateCovarianceInverse(p0, s);
    m.projection = ProjectionMatrix(static_cast<int>(p0.size()));
    m.omega = Omega(p0, s);
    return m;
  }
};

}  // namespace dpchi

#endif  // DPCHI_COVARIANCE_H_
