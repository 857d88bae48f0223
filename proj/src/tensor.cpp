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

#include "dml/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dml/error.hpp"

namespace dml {
namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": " + shape_of(a) + " vs " + shape_of(b));
  }
}

Matrix checked(Matrix m, const char* op) {
  if (!m.all_finite()) throw NumericError(std::string(op) + " produced a non-finite entry");
  return m;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ShapeError("matrix " + std::to_string(rows) + "x" + std::to_string(cols) + " given " +
                     std::to_string(values_.size()) + " entries");
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  values_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    values_.insert(values_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + shape_of(a) + " x " + shape_of(b));
  }
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      auto b_row = b.row(p);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aip * b_row[j];
    }
  }
  return checked(std::move(out), "matmul");
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
  return checked(std::move(out), "add");
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] -= b.values()[i];
  return checked(std::move(out), "subtract");
}

Matrix scale(const Matrix& a, double s) {
  Matrix out = a;
  for (double& v : out.values()) v *= s;
  return checked(std::move(out), "scale");
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.values()[i];
  return checked(std::move(out), "hadamard");
}

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw ShapeError("matvec: " + shape_of(a) + " x vector of " + std::to_string(x.size()));
  }
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    throw ShapeError("matvec_transposed: " + shape_of(a) + "^T x vector of " +
                     std::to_string(x.size()));
  }
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] += r[j] * x[i];
  }
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("distance: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double frobenius_norm(const Matrix& a) { return norm(a.values()); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  return std::sqrt(squared_distance(a.values(), b.values()));
}

double orthogonality_defect(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("orthogonality_defect: " + shape_of(a));
  const std::size_t n = a.rows();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dot(a.row(i), a.row(j)) - (i == j ? 1.0 : 0.0);
      s += d * d;
    }
  }
  return std::sqrt(s);
}

Matrix gram_schmidt_orthonormalize(const Matrix& m, double pivot_tolerance) {
  if (m.rows() != m.cols()) throw ShapeError("gram_schmidt: expected square, got " + shape_of(m));
  if (!m.all_finite()) throw NumericError("gram_schmidt: non-finite input");
  Matrix q = m;
  const std::size_t n = q.rows();
  for (std::size_t i = 0; i < n; ++i) {
    auto qi = q.row(i);
    // Modified GS: subtract projections one at a time against the updated row.
    for (std::size_t j = 0; j < i; ++j) {
      auto qj = q.row(j);
      const double proj = dot(qi, qj);
      for (std::size_t c = 0; c < n; ++c) qi[c] -= proj * qj[c];
    }
    const double pivot = norm(qi);
    if (pivot < pivot_tolerance) {
      throw DegenerateInputError("gram_schmidt: row " + std::to_string(i) +
                                 " is linearly dependent (pivot norm " + std::to_string(pivot) +
                                 ")");
    }
    for (double& v : qi) v /= pivot;
  }
  return q;
}

Svd jacobi_svd(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("jacobi_svd: expected square, got " + shape_of(a));
  const std::size_t n = a.rows();
  // Work on columns: store A^T so each column of A is a contiguous row.
  Matrix w = transpose(a);
  Matrix vt = Matrix::identity(n);  // rows are right singular vectors

  constexpr double kTol = 1e-15;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto wp = w.row(p);
        auto wq = w.row(q);
        const double alpha = dot(wp, wp);
        const double beta = dot(wq, wq);
        const double gamma = dot(wp, wq);
        if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = wp[i];
          const double y = wq[i];
          wp[i] = c * x - s * y;
          wq[i] = s * x + c * y;
        }
        auto vp = vt.row(p);
        auto vq = vt.row(q);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = vp[i];
          const double y = vq[i];
          vp[i] = c * x - s * y;
          vq[i] = s * x + c * y;
        }
      }
    }
    if (off <= kTol) break;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vector sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = norm(w.row(i));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Svd out{Matrix(n, n), Vector(n), Matrix(n, n)};
  const double scale_ref = sigma.empty() ? 0.0 : sigma[order[0]];
  const double rank_tol = std::max(scale_ref, 1.0) * 1e-13;
  // Columns of U, built as rows of ut and completed by Gram-Schmidt if needed.
  Matrix ut(n, n);
  std::vector<bool> filled(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.sigma[j] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) out.v(i, j) = vt(src, i);
    if (sigma[src] > rank_tol) {
      for (std::size_t i = 0; i < n; ++i) ut(j, i) = w(src, i) / sigma[src];
      filled[j] = true;
    }
  }
  std::size_t basis = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (filled[j]) continue;
    while (basis < n) {
      Vector cand(n, 0.0);
      cand[basis++] = 1.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (!filled[r]) continue;
        const double proj = dot(cand, ut.row(r));
        for (std::size_t i = 0; i < n; ++i) cand[i] -= proj * ut(r, i);
      }
      const double len = norm(cand);
      if (len > 1e-6) {
        for (std::size_t i = 0; i < n; ++i) ut(j, i) = cand[i] / len;
        filled[j] = true;
        break;
      }
    }
  }
  out.u = transpose(ut);
  return out;
}

Matrix procrustes_oracle(std::span<const Vector> sources, std::span<const Vector> targets) {
  if (sources.size() != targets.size()) {
    throw ShapeError("procrustes: " + std::to_string(sources.size()) + " sources vs " +
                     std::to_string(targets.size()) + " targets");
  }
  if (sources.empty()) throw ValidationError("procrustes: no pairs");
  const std::size_t k = sources.front().size();
  // Cross-covariance C = sum_i t_i s_i^T; the optimum is U V^T for C = U S V^T.
  Matrix c(k, k);
  for (std::size_t n = 0; n < sources.size(); ++n) {
    const Vector& s = sources[n];
    const Vector& t = targets[n];
    if (s.size() != k || t.size() != k) throw ShapeError("procrustes: inconsistent dimension");
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j) c(i, j) += t[i] * s[j];
  }
  const Svd svd = jacobi_svd(c);
  return matmul(svd.u, transpose(svd.v));
}

Vector finite_diff_grad(const ScalarFunction& f, std::span<const double> p, double h) {
  if (!(h > 0.0)) throw ValidationError("finite_diff_grad: step must be positive");
  Vector x(p.begin(), p.end());
  Vector grad(p.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericError("finite_diff_grad: non-finite evaluation at coordinate " +
                         std::to_string(i));
    }
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  if (a.size() != b.size()) throw ShapeError("max_relative_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace dml
