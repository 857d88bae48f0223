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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "dml/data.hpp"
#include "dml/embeddings.hpp"
#include "dml/error.hpp"
#include "dml/mapping.hpp"
#include "test_util.hpp"

namespace dml {
namespace {

using testing::central_diff;
using testing::max_abs_diff;
using testing::random_matrix;
using testing::random_orthogonal;
using testing::random_vector;
using testing::relative_error;
using testing::rotation2;

constexpr double kPi = std::numbers::pi;

std::vector<EmbeddingPair> random_pairs(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<EmbeddingPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    pairs.push_back({project_unit_ball(random_vector(k, rng)), project_unit_ball(random_vector(k, rng))});
  }
  return pairs;
}

std::vector<EmbeddingPair> planted_pairs(std::size_t n, const Matrix& q, Rng& rng) {
  std::vector<EmbeddingPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    Vector a = project_unit_ball(random_vector(q.rows(), rng));
    Vector b = matvec(q, a);
    pairs.push_back({std::move(a), std::move(b)});
  }
  return pairs;
}

TEST(OrthogonalMap, RejectsNonOrthogonal) {
  EXPECT_THROW(OrthogonalMap(Matrix{{1, 1}, {0, 1}}), DegenerateInputError);
  EXPECT_THROW(OrthogonalMap(Matrix(2, 3)), ShapeError);
  EXPECT_NO_THROW(OrthogonalMap(rotation2(0.3)));
}

TEST(MapForward, IdentityAndQuarterTurn) {
  const Vector e{0.3, -0.2};
  EXPECT_EQ(map_forward(OrthogonalMap::identity(2), e), e);
  const OrthogonalMap r(rotation2(kPi / 2));
  const Vector out = map_forward(r, Vector{1, 0});
  EXPECT_NEAR(out[0], 0.0, 1e-15);
  EXPECT_NEAR(out[1], 1.0, 1e-15);
}

TEST(MapInverse, IdentityAndQuarterTurn) {
  const Vector e{0.3, -0.2};
  EXPECT_EQ(map_inverse(OrthogonalMap::identity(2), e), e);
  const Vector out = map_inverse(OrthogonalMap(rotation2(kPi / 2)), Vector{0, 1});
  EXPECT_NEAR(out[0], 1.0, 1e-15);
  EXPECT_NEAR(out[1], 0.0, 1e-15);
}

TEST(MapForward, DimensionMismatchThrows) {
  EXPECT_THROW(map_forward(OrthogonalMap::identity(3), Vector(2, 0.0)), ShapeError);
  EXPECT_THROW(map_inverse(OrthogonalMap::identity(3), Vector(4, 0.0)), ShapeError);
}

TEST(MappingProperties, IsometryRoundTripAndInnerProducts) {
  Rng rng(17);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 1 + rng.index(16);
    const OrthogonalMap x(random_orthogonal(k, rng));
    const Vector a = random_vector(k, rng), b = random_vector(k, rng);
    const Vector xa = map_forward(x, a), xb = map_forward(x, b);
    EXPECT_NEAR(norm(xa), norm(a), 1e-9);
    EXPECT_NEAR(dot(xa, xb), dot(a, b), 1e-9);
    const Vector back = map_inverse(x, xa);
    for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(back[i], a[i], 1e-9);
  }
}

TEST(AlignmentLoss, HandExamples) {
  const std::vector<EmbeddingPair> same{{{0.1, 0.2}, {0.1, 0.2}}};
  const auto zero = alignment_loss(OrthogonalMap::identity(2), same);
  EXPECT_EQ(zero.primal, 0.0);
  EXPECT_EQ(zero.dual, 0.0);
  const std::vector<EmbeddingPair> one{{{1, 0}, {0, 1}}};
  const auto two = alignment_loss(OrthogonalMap::identity(2), one);
  EXPECT_EQ(two.primal, 2.0);
  EXPECT_EQ(two.dual, 2.0);
}

TEST(AlignmentLoss, PrimalEqualsDualAndTermwiseExpansion) {
  Rng rng(23);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 1 + rng.index(12);
    const OrthogonalMap x(random_orthogonal(k, rng));
    const auto pairs = random_pairs(1 + rng.index(5), k, rng);
    const auto loss = alignment_loss(x, pairs);
    EXPECT_NEAR(loss.primal, loss.dual, 1e-9);
    // ||Xa - b||^2 = |a|^2 + |b|^2 - 2 <Xa, b>, written out by hand.
    double expanded = 0.0;
    for (const auto& p : pairs) {
      double xab = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        double xa_i = 0.0;
        for (std::size_t j = 0; j < k; ++j) xa_i += x.matrix()(i, j) * p.a[j];
        xab += xa_i * p.b[i];
      }
      expanded += dot(p.a, p.a) + dot(p.b, p.b) - 2.0 * xab;
    }
    EXPECT_NEAR(loss.primal, expanded, 1e-9);
  }
}

TEST(AlignmentLoss, EmptyPairsRejected) {
  EXPECT_THROW(alignment_loss(OrthogonalMap::identity(2), std::vector<EmbeddingPair>{}),
               ValidationError);
}

TEST(AlignmentGradient, PrimalMatchesCentralDifferences) {
  Rng rng(29);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 2 + rng.index(5);
    const Matrix x = random_matrix(k, k, rng);
    const auto pairs = random_pairs(4, k, rng);
    const auto f = [&](const Vector& p) {
      return alignment_loss(Matrix(k, k, p), pairs).primal;
    };
    EXPECT_LE(relative_error(primal_gradient(x, pairs).values(), central_diff(f, x.values())),
              1e-4);
  }
}

TEST(AlignmentGradient, CombinedMatchesCentralDifferences) {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 2 + rng.index(5);
    const Matrix x = random_matrix(k, k, rng);
    const auto pairs = random_pairs(4, k, rng);
    const auto f = [&](const Vector& p) {
      const auto l = alignment_loss(Matrix(k, k, p), pairs);
      return 0.5 * (l.primal + l.dual);
    };
    EXPECT_LE(relative_error(alignment_gradient(x, pairs).values(), central_diff(f, x.values())),
              1e-4);
  }
}

TEST(UpdateMapping, AlignedPairsAreStationary) {
  Rng rng(37);
  const OrthogonalMap x(random_orthogonal(4, rng));
  const auto pairs = planted_pairs(10, x.matrix(), rng);
  const auto u = update_mapping(x, pairs, 0.5);
  EXPECT_LE(max_abs_diff(u.map.matrix(), x.matrix()), 1e-9);
  EXPECT_NEAR(u.loss, 0.0, 1e-20);
}

TEST(UpdateMapping, StaysOrthogonalAndReportsPreStepLoss) {
  Rng rng(41);
  OrthogonalMap x = OrthogonalMap::identity(8);
  const auto pairs = random_pairs(30, 8, rng);
  for (int step = 0; step < 100; ++step) {
    const auto expected = alignment_loss(x, pairs);
    const auto u = update_mapping(x, pairs, 2.0);
    EXPECT_DOUBLE_EQ(u.loss, 0.5 * (expected.primal + expected.dual));
    EXPECT_LE(orthogonality_defect(u.map.matrix()), 1e-6);
    x = u.map;
  }
}

TEST(UpdateMapping, PlantedRecoveryAtTheOverlapBound) {
  const std::size_t k = 16;
  const std::size_t n = min_overlap_required(k);
  ASSERT_EQ(n, 120u);
  const Matrix q = random_rotation(k, 5);
  Rng rng(43);
  const auto pairs = planted_pairs(n, q, rng);
  const auto fit = fit_mapping(OrthogonalMap::identity(k), pairs, 5.0, 20000, 1e-9);
  EXPECT_LE(alignment_loss(fit.map, pairs).primal, 1e-6);

  std::vector<Vector> src, dst;
  for (const auto& p : pairs) {
    src.push_back(p.a);
    dst.push_back(p.b);
  }
  EXPECT_LE(frobenius_distance(fit.map.matrix(), procrustes_oracle(src, dst)), 1e-2);

  const auto held_out = planted_pairs(200, q, rng);
  double worst = 0.0;
  for (const auto& p : held_out) {
    worst = std::max(worst, std::sqrt(squared_distance(map_forward(fit.map, p.a), p.b)));
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(ComposeMappings, Examples) {
  const std::vector<OrthogonalMap> ids{OrthogonalMap::identity(3), OrthogonalMap::identity(3)};
  EXPECT_EQ(compose_mappings(ids), OrthogonalMap::identity(3));
  const std::vector<OrthogonalMap> one{OrthogonalMap(rotation2(0.7))};
  EXPECT_EQ(compose_mappings(one), one.front());
}

TEST(ComposeMappings, RotationsAddAndMatchSequentialHops) {
  const std::vector<OrthogonalMap> hops{OrthogonalMap(rotation2(0.4)), OrthogonalMap(rotation2(1.1))};
  const OrthogonalMap joint = compose_mappings(hops);
  EXPECT_LE(max_abs_diff(joint.matrix(), rotation2(1.5)), 1e-9);

  Rng rng(47);
  const std::vector<OrthogonalMap> chain{OrthogonalMap(random_orthogonal(5, rng)),
                                         OrthogonalMap(random_orthogonal(5, rng)),
                                         OrthogonalMap(random_orthogonal(5, rng))};
  const OrthogonalMap all = compose_mappings(chain);
  for (int t = 0; t < 100; ++t) {
    const Vector e = random_vector(5, rng);
    Vector hop = e;
    for (const auto& x : chain) hop = map_forward(x, hop);
    const Vector direct = map_forward(all, e);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(direct[i], hop[i], 1e-9);
  }
}

TEST(ComposeMappings, MixedDimensionsRejected) {
  const std::vector<OrthogonalMap> bad{OrthogonalMap::identity(2), OrthogonalMap::identity(3)};
  EXPECT_THROW(compose_mappings(bad), ShapeError);
}

TEST(MinOverlapRequired, Values) {
  EXPECT_EQ(min_overlap_required(16), 120u);
  EXPECT_EQ(min_overlap_required(1), 0u);
  EXPECT_EQ(min_overlap_required(2), 1u);
}

TEST(MapFile, RoundTripIsExact) {
  Rng rng(53);
  const OrthogonalMap x(random_orthogonal(6, rng));
  const auto file = std::filesystem::temp_directory_path() / "dml_test_map.txt";
  save_map(x, file);
  EXPECT_EQ(load_map(file), x);
  std::filesystem::remove(file);
}

}  // namespace
}  // namespace dml
