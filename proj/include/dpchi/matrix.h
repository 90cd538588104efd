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

#ifndef DPCHI_MATRIX_H_
#define DPCHI_MATRIX_H_

#include <cstddef>
#include <span>
#include <vector>

#include "dpchi/errors.h"

namespace dpchi {

// Small dense row-major matrix. Only what the covariance algebra needs.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  static Matrix Identity(int d) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[Index(i, j)]; }
  double operator()(int i, int j) const { return data_[Index(i, j)]; }

  std::span<const double> row(int i) const {
    return {data_.data() + static_cast<size_t>(i) * cols_,
            static_cast<size_t>(cols_)};
  }

  Matrix operator*(const Matrix& other) const {
    internal::RequireShape(cols_ == other.rows_, "matrix product shape");
    Matrix out(rows_, other.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const double a = (*this)(i, k);
        for (int j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
      }
    return out;
  }

  std::vector<double> operator*(std::span<const double> v) const {
    internal::RequireShape(static_cast<int>(v.size()) == cols_,
                           "matrix-vector shape");
    std::vector<double> out(rows_, 0.0);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
  }

  Matrix operator-(const Matrix& other) const {
    internal::RequireShape(rows_ == other.rows_ && cols_ == other.cols_,
                           "matrix difference shape");
    Matrix out = *this;
    for (size_t i = 0; i < data_.size(); ++i) out.data_[i] -= other.data_[i];
    return out;
  }

  // x' A x.
  double QuadraticForm(std::span<const double> x) const {
    internal::RequireShape(rows_ == cols_ &&
                               static_cast<int>(x.size()) == rows_,
                           "quadratic form shape");
    double total = 0.0;
    for (int i = 0; i < rows_; ++i) {
      double inner = 0.0;
      for (int j = 0; j < cols_; ++j) inner += (*this)(i, j) * x[j];
      total += x[i] * inner;
    }
    return total;
  }

 private:
  size_t Index(int i, int j) const {
    return static_cast<size_t>(i) * cols_ + j;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace dpchi

#endif  // DPCHI_MATRIX_H_
