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

#include "dml/data.hpp"
#include "dml/embeddings.hpp"
#include "dml/error.hpp"
#include "test_util.hpp"

namespace dml {
namespace {

using testing::central_diff;
using testing::random_vector;
using testing::relative_error;

std::vector<Vector> feature_rows(const FeatureMap& m) {
  std::vector<Vector> rows;
  for (const auto& [id, v] : m) rows.push_back(v);
  return rows;
}

TEST(ProjectUnitBall, InsideUnchanged) {
  EXPECT_EQ(project_unit_ball(Vector{0.3, 0.4}), (Vector{0.3, 0.4}));
}

TEST(ProjectUnitBall, OutsideRescaled) {
  const Vector p = project_unit_ball(Vector{3.0, 4.0});
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.8, 1e-15);
}

TEST(ProjectUnitBall, ZeroStaysZero) {
  EXPECT_EQ(project_unit_ball(Vector{0.0, 0.0, 0.0}), (Vector{0.0, 0.0, 0.0}));
}

TEST(ProjectUnitBall, BackwardMatchesCentralDifferences) {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const Vector raw = random_vector(4, rng, t % 2 ? 2.0 : 0.2);
    const Vector upstream = random_vector(4, rng);
    const auto f = [&](const Vector& v) { return dot(project_unit_ball(v), upstream); };
    EXPECT_LE(relative_error(project_unit_ball_backward(raw, upstream), central_diff(f, raw)),
              1e-6);
  }
}

TEST(Autoencoder, ZeroWeightsGiveZeroEmbedding) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden = {4};
  Autoencoder model(5, cfg);
  model.set_parameters(Vector(model.parameters().size(), 0.0));
  EXPECT_EQ(model.encode(Vector{1, -2, 3, 0.5, 7}), Vector(3, 0.0));
}

TEST(Autoencoder, ScaledOutputProjectsToUnitNorm) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden = {};
  Autoencoder model(3, cfg);
  auto& layer = model.encoder().layers().front();
  layer.weights = Matrix::identity(3);
  layer.bias = Vector(3, 0.0);
  // Raw encoder output (1.5, 2, 0) has norm 2.5.
  const Vector e = model.encode(Vector{1.5, 2.0, 0.0});
  EXPECT_NEAR(norm(e), 1.0, 1e-15);
  EXPECT_NEAR(e[0], 0.6, 1e-15);
}

TEST(Autoencoder, EmbeddingsStayInUnitBall) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 4;
  Autoencoder model(6, cfg);
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    const Vector e = model.encode(random_vector(6, rng, 10.0));
    EXPECT_LE(dot(e, e), 1.0 + 1e-9);
  }
}

TEST(Autoencoder, DimensionMismatchThrows) {
  Autoencoder model(6, AutoencoderConfig{});
  EXPECT_THROW(model.encode(Vector(5, 0.0)), ShapeError);
  EXPECT_THROW(model.decode(Vector(3, 0.0)), ShapeError);
}

TEST(Autoencoder, ParameterCountMatchesLayerSizes) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 16;
  Autoencoder model(12, cfg);
  // 12->32->16->16 and 16->16->32->12.
  const std::size_t enc = 12 * 32 + 32 + 32 * 16 + 16 + 16 * 16 + 16;
  const std::size_t dec = 16 * 16 + 16 + 16 * 32 + 32 + 32 * 12 + 12;
  EXPECT_EQ(model.parameters().size(), enc + dec);
  EXPECT_EQ(model.encoder().output_dim(), model.decoder().input_dim());
}

TEST(Autoencoder, GradientMatchesCentralDifferences) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden = {4};
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    Autoencoder model(6, cfg);
    Rng rng(100 + seed);
    std::vector<Vector> batch;
    for (int i = 0; i < 4; ++i) batch.push_back(random_vector(6, rng));
    MlpGradient ge = model.encoder().make_gradient();
    MlpGradient gd = model.decoder().make_gradient();
    model.accumulate_gradient(batch, ge, gd);
    Vector analytic = ge.flatten();
    const Vector dec = gd.flatten();
    analytic.insert(analytic.end(), dec.begin(), dec.end());

    Autoencoder probe = model;
    const auto loss = [&](const Vector& p) {
      probe.set_parameters(p);
      return probe.reconstruction_loss(batch);
    };
    EXPECT_LE(relative_error(analytic, central_diff(loss, model.parameters())), 1e-4)
        << "seed " << seed;
  }
}

TEST(TrainAutoencoder, OverfitsSingleSample) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden = {8};
  cfg.epochs = 2000;
  cfg.learning_rate = 0.05;
  const std::vector<Vector> data{{0.2, -0.4, 0.1, 0.3}};
  const auto fit = train_autoencoder(data, cfg);
  EXPECT_LE(fit.loss_history.back(), 1e-3);
}

TEST(TrainAutoencoder, LinearCaseOnOrthogonalData) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 3;
  cfg.hidden = {};
  cfg.epochs = 3000;
  cfg.learning_rate = 0.2;
  cfg.batch_size = 3;
  const std::vector<Vector> data{{0.5, 0, 0}, {0, 0.5, 0}, {0, 0, 0.5}};
  const auto fit = train_autoencoder(data, cfg);
  EXPECT_LE(fit.loss_history.back(), 1e-6);
}

TEST(TrainAutoencoder, LossHistoryNonIncreasingOnSyntheticFeatures) {
  SyntheticConfig sc;
  sc.seed = 1;
  const auto pair = generate_synthetic_pair(sc);
  AutoencoderConfig cfg;
  cfg.latent_dim = sc.latent_dim;
  cfg.epochs = 30;
  // Full batch: plain gradient descent with a small step cannot go uphill.
  const auto rows = feature_rows(pair.a.user_features);
  cfg.batch_size = rows.size();
  const auto fit = train_autoencoder(rows, cfg);
  ASSERT_EQ(fit.loss_history.size(), cfg.epochs);
  for (std::size_t e = 1; e < fit.loss_history.size(); ++e) {
    EXPECT_LE(fit.loss_history[e], fit.loss_history[e - 1] + 1e-6) << "epoch " << e + 1;
  }
}

TEST(TrainAutoencoder, SameSeedBitwiseIdentical) {
  SyntheticConfig sc;
  sc.users_per_domain = 200;
  sc.overlap_count = 20;
  const auto pair = generate_synthetic_pair(sc);
  AutoencoderConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 42;
  const auto rows = feature_rows(pair.a.item_features);
  EXPECT_EQ(train_autoencoder(rows, cfg).model.parameters(),
            train_autoencoder(rows, cfg).model.parameters());
  cfg.seed = 43;
  EXPECT_NE(train_autoencoder(rows, cfg).model.parameters(),
            train_autoencoder(rows, AutoencoderConfig{.epochs = 5, .seed = 42}).model.parameters());
}

TEST(TrainAutoencoder, RejectsBadInput) {
  EXPECT_THROW(train_autoencoder(std::vector<Vector>{}, AutoencoderConfig{}), ValidationError);
  EXPECT_THROW(train_autoencoder(std::vector<Vector>{{1, 2}, {1}}, AutoencoderConfig{}), ShapeError);
}

TEST(TrainAutoencoder, DivergenceNamesEpoch) {
  AutoencoderConfig cfg;
  cfg.latent_dim = 2;
  cfg.hidden = {};
  cfg.learning_rate = 1e6;
  cfg.epochs = 50;
  try {
    train_autoencoder(std::vector<Vector>{{1e3, -1e3}, {2e3, 5e2}}, cfg);
    FAIL() << "expected divergence";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(EmbedIdsOnly, RowsInsideBallAndSeeded) {
  const auto a = embed_ids_only(50, 8, 3);
  EXPECT_EQ(a, embed_ids_only(50, 8, 3));
  EXPECT_NE(a, embed_ids_only(50, 8, 4));
  for (std::size_t i = 0; i < a.rows(); ++i) EXPECT_LE(dot(a.row(i), a.row(i)), 1.0 + 1e-9);
}

TEST(EmbeddingTable, StepProjectsBackIntoBall) {
  EmbeddingTable t(1, 2);
  t.step(0, Vector{-30.0, -40.0}, 1.0);
  EXPECT_NEAR(t.row(0)[0], 0.6, 1e-15);
  EXPECT_NEAR(t.row(0)[1], 0.8, 1e-15);
}

TEST(EmbeddingTable, CsvRoundTrip) {
  const auto table = embed_ids_only(4, 3, 9);
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  const auto file = std::filesystem::temp_directory_path() / "dml_test_embeddings.csv";
  save_embeddings(table, ids, file);
  const auto [read_ids, read] = load_embeddings(file);
  EXPECT_EQ(read_ids, ids);
  EXPECT_EQ(read, table);
  std::filesystem::remove(file);
}

}  // namespace
}  // namespace dml
