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

#ifndef DML_TESTS_TEST_UTIL_HPP_
#define DML_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "dml/rng.hpp"
#include "dml/tensor.hpp"

namespace dml::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal(0.0, scale);
  return m;
}

inline Vector random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  Vector v(n);
  for (double& e : v) e = rng.normal(0.0, scale);
  return v;
}

// Classical Gram-Schmidt on a Gaussian matrix; independent of the library kernel.
inline Matrix random_orthogonal(std::size_t k, Rng& rng) {
  std::vector<Vector> rows;
  while (rows.size() < k) {
    Vector v = random_vector(k, rng);
    for (const auto& q : rows) {
      double d = 0.0;
      for (std::size_t i = 0; i < k; ++i) d += v[i] * q[i];
      for (std::size_t i = 0; i < k; ++i) v[i] -= d * q[i];
    }
    double n = 0.0;
    for (double e : v) n += e * e;
    n = std::sqrt(n);
    if (n < 1e-6) continue;
    for (double& e : v) e /= n;
    rows.push_back(v);
  }
  Matrix m(k, k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

inline Matrix rotation2(double theta) {
  return Matrix{{std::cos(theta), -std::sin(theta)}, {std::sin(theta), std::cos(theta)}};
}

inline Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) {
    m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  }
  return m;
}

// Central differences, written out here so gradient tests do not lean on the
// library's own helper.
template <typename F>
Vector central_diff(F&& f, Vector p, double h = 1e-6) {
  Vector g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    const double up = f(p);
    p[i] = keep - h;
    const double down = f(p);
    p[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// max_i |a_i - b_i| / max_i max(|a_i|, |b_i|)
inline double relative_error(const Vector& a, const Vector& b) {
  double diff = 0.0;
  double scale = 1e-300;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return diff / scale;
}

}  // namespace dml::testing

#endif  // DML_TESTS_TEST_UTIL_HPP_
