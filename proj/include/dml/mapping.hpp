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

#ifndef DML_MAPPING_HPP_
#define DML_MAPPING_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "dml/tensor.hpp"

namespace dml {

// A k x k matrix X with ||X X^T - I||_F <= kTolerance. Maps domain-A user
// embeddings into domain B; X^T maps back.
class OrthogonalMap {
 public:
  static constexpr double kTolerance = 1e-6;

  OrthogonalMap() = default;
  // Throws DegenerateInputError if `m` is not orthogonal within kTolerance.
  explicit OrthogonalMap(Matrix m);

  static OrthogonalMap identity(std::size_t k);
  // Modified Gram-Schmidt over the rows of `m`.
  static OrthogonalMap orthonormalize(const Matrix& m);

  std::size_t k() const noexcept { return matrix_.rows(); }
  const Matrix& matrix() const noexcept { return matrix_; }

  friend bool operator==(const OrthogonalMap&, const OrthogonalMap&) = default;

 private:
  Matrix matrix_;
};

Vector map_forward(const OrthogonalMap& x, std::span<const double> e);   // X e
Vector map_inverse(const OrthogonalMap& x, std::span<const double> e);   // X^T e

// Embeddings of one overlap user in domain A and domain B.
struct EmbeddingPair {
  Vector a;
  Vector b;
};

struct AlignmentLoss {
  double primal = 0.0;  // sum ||X a - b||^2
  double dual = 0.0;    // sum ||a - X^T b||^2
};

// Evaluated for any square X (the two values coincide when X is orthogonal).
AlignmentLoss alignment_loss(const Matrix& x, std::span<const EmbeddingPair> pairs);
AlignmentLoss alignment_loss(const OrthogonalMap& x, std::span<const EmbeddingPair> pairs);

// d/dX of (primal + dual) / 2, summed over pairs.
Matrix alignment_gradient(const Matrix& x, std::span<const EmbeddingPair> pairs);
// d/dX of the primal term alone.
Matrix primal_gradient(const Matrix& x, std::span<const EmbeddingPair> pairs);

struct MappingUpdate {
  OrthogonalMap map;
  double loss = 0.0;     // (primal + dual) / 2 before the step
  AlignmentLoss before;  // both terms before the step
};

// One gradient step on the per-pair mean of (primal + dual) / 2 followed by
// Gram-Schmidt re-orthonormalisation. A step that collapses the rank raises
// DegenerateInputError; lower the learning rate.
MappingUpdate update_mapping(const OrthogonalMap& x, std::span<const EmbeddingPair> pairs,
                             double learning_rate);

// X_{1N} for hops [X_12, X_23, ...]: applying the result equals applying each
// hop in order, i.e. X_{(N-1)N} ... X_23 X_12.
struct MappingFit {
  OrthogonalMap map;
  std::vector<double> loss_history;  // (primal + dual) / 2 before each step
};

// Repeats update_mapping until the primal loss drops to `tolerance` or
// `max_steps` is reached.
MappingFit fit_mapping(const OrthogonalMap& start, std::span<const EmbeddingPair> pairs,
                       double learning_rate, std::size_t max_steps, double tolerance);

OrthogonalMap compose_mappings(std::span<const OrthogonalMap> maps);

// k (k - 1) / 2
std::size_t min_overlap_required(std::size_t k);

// First line k, then k rows of k values.
void save_map(const OrthogonalMap& x, const std::filesystem::path& file);
OrthogonalMap load_map(const std::filesystem::path& file);

}  // namespace dml

#endif  // DML_MAPPING_HPP_
