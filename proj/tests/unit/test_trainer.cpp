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

#include "dml/csv.hpp"
#include "dml/error.hpp"
#include "dml/trainer.hpp"

namespace dml {
namespace {

SyntheticPair small_pair(std::uint64_t seed, double noise = 0.05) {
  SyntheticConfig sc;
  sc.users_per_domain = 200;
  sc.items_per_domain = 60;
  sc.overlap_count = 40;
  sc.ratings_per_user = 8;
  sc.noise_std = noise;
  sc.seed = seed;
  return generate_synthetic_pair(sc);
}

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.embedding_dim = 4;
  cfg.hidden = {8, 4};
  cfg.autoencoder_epochs = 5;
  cfg.lr_rs = 1.0;
  cfg.lr_map = 1.0;
  cfg.seed = 3;
  return cfg;
}

TEST(HasConverged, Examples) {
  EXPECT_TRUE(has_converged(std::vector<double>{0.5, 0.5}, 1e-5));
  EXPECT_FALSE(has_converged(std::vector<double>{0.5, 0.4}, 1e-5));
  EXPECT_FALSE(has_converged(std::vector<double>{0.3}, 1.0));
  EXPECT_FALSE(has_converged(std::vector<double>{}, 1.0));
}

TEST(HasConverged, UsesTotalOfSixTerms) {
  EpochRecord a, b;
  a.loss_a = 0.1;
  b.loss_a = 0.1;
  b.loss_cross_b = 2e-5;
  const std::vector<EpochRecord> h{a, b};
  EXPECT_FALSE(has_converged(h, 1e-5));
  EXPECT_TRUE(has_converged(h, 1e-4));
}

TEST(TrainConfig, ValidateRejectsBadValues) {
  TrainConfig cfg;
  cfg.convergence_eps = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = TrainConfig{};
  cfg.max_epochs = 0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  EXPECT_NO_THROW(TrainConfig{}.validate());
}

TEST(FeatureMode, NamesRoundTrip) {
  EXPECT_EQ(feature_mode_from_string(to_string(FeatureMode::kFeatures)), FeatureMode::kFeatures);
  EXPECT_EQ(feature_mode_from_string(to_string(FeatureMode::kIdsOnly)), FeatureMode::kIdsOnly);
  EXPECT_EQ(feature_mode_from_string("ids-only"), FeatureMode::kIdsOnly);
  EXPECT_THROW(feature_mode_from_string("pixels"), ValidationError);
}

TEST(RunEpoch, EmptyRegistrySkipsMappingPhase) {
  const auto pair = small_pair(1);
  const auto cfg = small_config();
  auto state = initialize_state(pair.a, pair.b, OverlapRegistry{}, cfg);
  state = run_epoch(std::move(state), cfg);
  ASSERT_EQ(state.history.size(), 1u);
  EXPECT_EQ(state.mapping, OrthogonalMap::identity(cfg.embedding_dim));
  EXPECT_EQ(state.history[0].loss_overlap_a, 0.0);
  EXPECT_GT(state.history[0].loss_cross_a, 0.0);
  EXPECT_GT(state.history[0].loss_cross_b, 0.0);
}

TEST(RunEpoch, BaselineRunsOnlyWithinDomainPhase) {
  const auto pair = small_pair(1);
  auto cfg = small_config();
  cfg.cross_domain = false;
  auto state = run_epoch(initialize_state(pair.a, pair.b, pair.registry, cfg), cfg);
  const auto& r = state.history.back();
  EXPECT_GT(r.loss_a, 0.0);
  EXPECT_EQ(r.loss_overlap_a + r.loss_overlap_b + r.loss_cross_a + r.loss_cross_b, 0.0);
  EXPECT_EQ(state.mapping, OrthogonalMap::identity(cfg.embedding_dim));
}

TEST(RunEpoch, MappingOrthogonalAndHistoryConsistent) {
  const auto pair = small_pair(2);
  auto cfg = small_config();
  cfg.max_epochs = 10;
  auto state = initialize_state(pair.a, pair.b, pair.registry, cfg);
  for (std::size_t e = 1; e <= cfg.max_epochs; ++e) {
    state = run_epoch(std::move(state), cfg);
    EXPECT_LE(orthogonality_defect(state.mapping.matrix()), 1e-6);
    EXPECT_EQ(state.history.size(), state.epoch);
    const auto& r = state.history.back();
    for (double v : {r.loss_a, r.loss_b, r.loss_overlap_a, r.loss_overlap_b, r.loss_cross_a,
                     r.loss_cross_b, r.val_a, r.val_b}) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
  }
}

TEST(Train, DeterministicUnderSeed) {
  const auto pair = small_pair(4);
  const auto cfg = small_config();
  const auto s1 = train(pair.a, pair.b, pair.registry, cfg);
  const auto s2 = train(pair.a, pair.b, pair.registry, cfg);
  EXPECT_EQ(s1.rs_a, s2.rs_a);
  EXPECT_EQ(s1.rs_b, s2.rs_b);
  EXPECT_EQ(s1.mapping, s2.mapping);
  EXPECT_EQ(s1.a.users, s2.a.users);
  ASSERT_EQ(s1.history.size(), s2.history.size());
  for (std::size_t i = 0; i < s1.history.size(); ++i) {
    EXPECT_EQ(s1.history[i].total_training_loss(), s2.history[i].total_training_loss());
  }
  auto other = cfg;
  other.seed = cfg.seed + 1;
  EXPECT_NE(train(pair.a, pair.b, pair.registry, other).rs_a, s1.rs_a);
}

TEST(Train, ConvergedFlagImpliesSmallDelta) {
  const auto pair = small_pair(5);
  auto cfg = small_config();
  cfg.convergence_eps = 1e-2;
  cfg.max_epochs = 30;
  const auto state = train(pair.a, pair.b, pair.registry, cfg);
  if (state.converged) {
    const auto& h = state.history;
    ASSERT_GE(h.size(), 2u);
    EXPECT_LT(std::abs(h.back().total_training_loss() - h[h.size() - 2].total_training_loss()),
              cfg.convergence_eps);
  } else {
    EXPECT_EQ(state.epoch, cfg.max_epochs);
  }
}

TEST(Train, BaselineRunsFullBudget) {
  const auto pair = small_pair(11);
  auto cfg = small_config();
  cfg.cross_domain = false;
  cfg.max_epochs = 6;
  cfg.convergence_eps = 1e3;
  const auto state = train(pair.a, pair.b, pair.registry, cfg);
  EXPECT_FALSE(state.converged);
  EXPECT_EQ(state.epoch, 6u);
  EXPECT_EQ(state.mapping_updates, 0u);
}

TEST(Train, NoiselessRunImprovesValidationRmse) {
  SyntheticConfig sc;
  sc.users_per_domain = 300;
  sc.items_per_domain = 100;
  sc.overlap_count = 40;
  sc.ratings_per_user = 30;
  sc.noise_std = 0.0;
  sc.seed = 6;
  const auto pair = generate_synthetic_pair(sc);
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.convergence_eps = 1e-12;
  const auto state = train(pair.a, pair.b, pair.registry, cfg);
  ASSERT_EQ(state.history.size(), 30u);
  EXPECT_LT(state.history.back().val_a, 0.9 * state.history.front().val_a);
  EXPECT_LT(state.history.back().val_b, 0.9 * state.history.front().val_b);
}

TEST(Train, IdsOnlyModeNeedsNoFeatures) {
  auto pair = small_pair(7);
  pair.a.user_features.clear();
  pair.a.item_features.clear();
  auto cfg = small_config();
  EXPECT_THROW(initialize_state(pair.a, pair.b, pair.registry, cfg), ValidationError);
  cfg.feature_mode = FeatureMode::kIdsOnly;
  const auto state = train(pair.a, pair.b, pair.registry, cfg);
  EXPECT_EQ(state.epoch, cfg.max_epochs);
  for (std::size_t u = 0; u < state.a.users.rows(); ++u) {
    EXPECT_LE(dot(state.a.users.row(u), state.a.users.row(u)), 1.0 + 1e-9);
  }
}

TEST(Train, FeatureEmbeddingsInsideUnitBall) {
  const auto pair = small_pair(8);
  const auto state = initialize_state(pair.a, pair.b, pair.registry, small_config());
  for (const auto* t : {&state.a.users, &state.a.items, &state.b.users, &state.b.items}) {
    for (std::size_t i = 0; i < t->rows(); ++i) EXPECT_LE(dot(t->row(i), t->row(i)), 1.0 + 1e-9);
  }
}

TEST(PredictFinal, UsesWithinDomainModelAndRejectsUnknownIds) {
  const auto pair = small_pair(9);
  const auto cfg = small_config();
  const auto state = train(pair.a, pair.b, pair.registry, cfg);
  const auto& r = pair.a.ratings.front();
  const auto& d = state.a;
  const double direct =
      state.rs_a.predict(d.users.row(d.index.user(r.user_id)), d.items.row(d.index.item(r.item_id)));
  EXPECT_EQ(predict_final(state, DomainTag::kA, r.user_id, r.item_id), direct);
  EXPECT_THROW(predict_final(state, DomainTag::kA, "nobody", r.item_id), LookupError);
  EXPECT_THROW(predict_final(state, DomainTag::kB, r.user_id, "nothing"), LookupError);
}

TEST(WriteHistory, HeaderAndRows) {
  const auto pair = small_pair(10);
  auto cfg = small_config();
  cfg.max_epochs = 2;
  const auto state = train(pair.a, pair.b, pair.registry, cfg);
  const auto file = std::filesystem::temp_directory_path() / "dml_test_history.csv";
  write_history(state.history, file);
  const auto lines = csv::read_lines(file);
  ASSERT_GE(lines.size(), 3u);
  EXPECT_EQ(lines[0], "epoch,L_A,L_B,L_oA,L_oB,L_Astar,L_Bstar,val_A,val_B");
  EXPECT_EQ(lines[1].substr(0, 2), "1,");
  std::filesystem::remove(file);
}

}  // namespace
}  // namespace dml
