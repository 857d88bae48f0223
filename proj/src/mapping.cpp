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

#include "dml/mapping.hpp"

#include <cmath>

#include "dml/csv.hpp"
#include "dml/error.hpp"

namespace dml {
namespace {

constexpr double kComposeDrift = 1e-9;

void require_pairs(const Matrix& x, std::span<const EmbeddingPair> pairs) {
  if (x.rows() != x.cols()) throw ShapeError("mapping must be square");
  if (pairs.empty()) throw ValidationError("alignment needs at least one overlap pair");
  for (const auto& p : pairs) {
    if (p.a.size() != x.rows() || p.b.size() != x.rows()) {
      throw ShapeError("overlap pair dimension does not match mapping size " +
                       std::to_string(x.rows()));
    }
  }
}

}  // namespace

OrthogonalMap::OrthogonalMap(Matrix m) : matrix_(std::move(m)) {
  if (matrix_.rows() != matrix_.cols()) throw ShapeError("orthogonal map must be square");
  const double defect = orthogonality_defect(matrix_);
  if (!(defect <= kTolerance)) {
    throw DegenerateInputError("matrix is not orthogonal (||XX^T - I||_F = " +
                               std::to_string(defect) + ")");
  }
}

OrthogonalMap OrthogonalMap::identity(std::size_t k) { return OrthogonalMap(Matrix::identity(k)); }

OrthogonalMap OrthogonalMap::orthonormalize(const Matrix& m) {
  return OrthogonalMap(gram_schmidt_orthonormalize(m));
}

Vector map_forward(const OrthogonalMap& x, std::span<const double> e) {
  return matvec(x.matrix(), e);
}

Vector map_inverse(const OrthogonalMap& x, std::span<const double> e) {
  return matvec_transposed(x.matrix(), e);
}

AlignmentLoss alignment_loss(const Matrix& x, std::span<const EmbeddingPair> pairs) {
  require_pairs(x, pairs);
  AlignmentLoss loss;
  for (const auto& p : pairs) {
    loss.primal += squared_distance(matvec(x, p.a), p.b);
    loss.dual += squared_distance(p.a, matvec_transposed(x, p.b));
  }
  return loss;
}

AlignmentLoss alignment_loss(const OrthogonalMap& x, std::span<const EmbeddingPair> pairs) {
  return alignment_loss(x.matrix(), pairs);
}

Matrix primal_gradient(const Matrix& x, std::span<const EmbeddingPair> pairs) {
  require_pairs(x, pairs);
  const std::size_t k = x.rows();
  Matrix g(k, k);
  for (const auto& p : pairs) {
    const Vector xa = matvec(x, p.a);
    for (std::size_t i = 0; i < k; ++i) {
      const double r = 2.0 * (xa[i] - p.b[i]);
      for (std::size_t j = 0; j < k; ++j) g(i, j) += r * p.a[j];
    }
  }
  return g;
}

Matrix alignment_gradient(const Matrix& x, std::span<const EmbeddingPair> pairs) {
  require_pairs(x, pairs);
  const std::size_t k = x.rows();
  // d/dX ||Xa - b||^2 = 2 (Xa - b) a^T ;  d/dX ||a - X^T b||^2 = -2 b (a - X^T b)^T
  Matrix g(k, k);
  for (const auto& p : pairs) {
    const Vector xa = matvec(x, p.a);
    const Vector xtb = matvec_transposed(x, p.b);
    for (std::size_t i = 0; i < k; ++i) {
      const double r = xa[i] - p.b[i];
      for (std::size_t j = 0; j < k; ++j) {
        g(i, j) += r * p.a[j] - p.b[i] * (p.a[j] - xtb[j]);
      }
    }
  }
  return g;
}

MappingUpdate update_mapping(const OrthogonalMap& x, std::span<const EmbeddingPair> pairs,
                             double learning_rate) {
  const AlignmentLoss before = alignment_loss(x, pairs);
  const Matrix grad = alignment_gradient(x.matrix(), pairs);
  const double step = learning_rate / static_cast<double>(pairs.size());
  Matrix moved = x.matrix();
  for (std::size_t i = 0; i < moved.size(); ++i) moved.values()[i] -= step * grad.values()[i];
  return {OrthogonalMap::orthonormalize(moved), 0.5 * (before.primal + before.dual), before};
}

MappingFit fit_mapping(const OrthogonalMap& start, std::span<const EmbeddingPair> pairs,
                       double learning_rate, std::size_t max_steps, double tolerance) {
  MappingFit fit{start, {}};
  for (std::size_t step = 0; step < max_steps; ++step) {
    MappingUpdate u = update_mapping(fit.map, pairs, learning_rate);
    if (u.before.primal <= tolerance) break;
    fit.loss_history.push_back(u.loss);
    fit.map = std::move(u.map);
  }
  return fit;
}

OrthogonalMap compose_mappings(std::span<const OrthogonalMap> maps) {
  if (maps.empty()) throw ValidationError("compose_mappings: no maps");
  const std::size_t k = maps.front().k();
  Matrix acc = maps.front().matrix();
  for (std::size_t i = 1; i < maps.size(); ++i) {
    if (maps[i].k() != k) throw ShapeError("compose_mappings: mixed dimensions");
    acc = matmul(maps[i].matrix(), acc);
  }
  if (orthogonality_defect(acc) > kComposeDrift) return OrthogonalMap::orthonormalize(acc);
  return OrthogonalMap(std::move(acc));
}

std::size_t min_overlap_required(std::size_t k) { return k * (k - (k > 0 ? 1 : 0)) / 2; }

void save_map(const OrthogonalMap& x, const std::filesystem::path& file) {
  auto out = csv::open_output(file);
  out << x.k() << '\n';
  for (std::size_t i = 0; i < x.k(); ++i) {
    for (std::size_t j = 0; j < x.k(); ++j) {
      if (j) out << ' ';
      out << csv::format_double(x.matrix()(i, j));
    }
    out << '\n';
  }
}

OrthogonalMap load_map(const std::filesystem::path& file) {
  const auto lines = csv::read_lines(file);
  if (lines.empty()) throw ParseError(file.string(), 1, "empty map file");
  const auto k = static_cast<std::size_t>(csv::parse_int(lines[0], file.string(), 1));
  if (lines.size() < k + 1) throw ParseError(file.string(), lines.size(), "too few rows");
  Matrix m(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    auto cols = csv::split(lines[i + 1], ' ');
    std::erase_if(cols, [](const std::string& s) { return s.empty(); });
    if (cols.size() != k) throw ParseError(file.string(), i + 2, "expected " + std::to_string(k) + " values");
    for (std::size_t j = 0; j < k; ++j) m(i, j) = csv::parse_double(cols[j], file.string(), i + 2);
  }
  return OrthogonalMap(std::move(m));
}

}  // namespace dml
