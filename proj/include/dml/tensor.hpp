// Copyright 2026 The dml-xdomain Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DML_TENSOR_HPP_
#define DML_TENSOR_HPP_

// Small dense linear algebra: row-major matrices, vector helpers, modified
// Gram-Schmidt, a Jacobi SVD used by the Procrustes oracle, and central
// finite differences. Everything is double precision and sized for k <= 256.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace dml {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix hadamard(const Matrix& a, const Matrix& b);

// y = a * x and y = a^T * x.
Vector matvec(const Matrix& a, std::span<const double> x);
Vector matvec_transposed(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
double squared_distance(std::span<const double> a, std::span<const double> b);
double frobenius_norm(const Matrix& a);
double frobenius_distance(const Matrix& a, const Matrix& b);

// ||A A^T - I||_F for square A.
double orthogonality_defect(const Matrix& a);

// Modified Gram-Schmidt over the rows of a square matrix. Row i of the result
// spans the same leading subspace as rows 0..i of `m`. Throws
// DegenerateInputError when a pivot norm falls below `pivot_tolerance`.
inline constexpr double kPivotTolerance = 1e-10;
Matrix gram_schmidt_orthonormalize(const Matrix& m, double pivot_tolerance = kPivotTolerance);

struct Svd {
  Matrix u;       // left singular vectors as columns
  Vector sigma;   // non-increasing
  Matrix v;       // right singular vectors as columns
};

// One-sided (Hestenes) Jacobi SVD of a square matrix. U is completed to a full
// orthonormal basis when the input is rank deficient.
Svd jacobi_svd(const Matrix& a);

// Global minimiser of sum_i ||X s_i - t_i||^2 over orthogonal X.
Matrix procrustes_oracle(std::span<const Vector> sources, std::span<const Vector> targets);

using ScalarFunction = std::function<double(std::span<const double>)>;

inline constexpr double kDefaultFiniteDiffStep = 1e-5;
Vector finite_diff_grad(const ScalarFunction& f, std::span<const double> p,
                        double h = kDefaultFiniteDiffStep);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-8);

}  // namespace dml

#endif  // DML_TENSOR_HPP_
