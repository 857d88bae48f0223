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

#ifndef DML_TRAINER_HPP_
#define DML_TRAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dml/data.hpp"
#include "dml/embeddings.hpp"
#include "dml/mapping.hpp"
#include "dml/recsys.hpp"

namespace dml {

enum class FeatureMode { kFeatures, kIdsOnly };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& name);

enum class DomainTag { kA, kB };

struct TrainConfig {
  std::size_t max_epochs = 100;
  double convergence_eps = 1e-5;
  double lr_rs = 2.0;
  double lr_map = 1.0;
  double lr_embedding = 0.1;  // ids-only mode
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  FeatureMode feature_mode = FeatureMode::kFeatures;
  std::size_t embedding_dim = 16;
  std::vector<std::size_t> hidden = {32, 16};
  double dropout_rate = 0.1;
  std::size_t autoencoder_epochs = 50;
  double autoencoder_lr = 0.01;
  double validation_fraction = 0.1;
  // When false only the within-domain phase runs: the no-transfer baseline.
  // The baseline always trains for max_epochs.
  bool cross_domain = true;

  void validate() const;
};

// One row of history.csv.
struct EpochRecord {
  std::size_t epoch = 0;
  double loss_a = 0.0;         // L_A
  double loss_b = 0.0;         // L_B
  double loss_overlap_a = 0.0; // L_oA, mean ||X a - b||^2 per pair
  double loss_overlap_b = 0.0; // L_oB, mean ||X^T b - a||^2 per pair
  double loss_cross_a = 0.0;   // L_A*, domain-A ratings through X into RS_B
  double loss_cross_b = 0.0;   // L_B*, domain-B ratings through X^T into RS_A
  double val_a = 0.0;          // validation RMSE, within-domain path
  double val_b = 0.0;

  double total_training_loss() const {
    return loss_a + loss_b + loss_overlap_a + loss_overlap_b + loss_cross_a + loss_cross_b;
  }
};

// Per-domain training view: id index, frozen (or ids-only trainable)
// embeddings, and indexed rating splits.
struct DomainState {
  DomainIndex index;
  EmbeddingTable users;
  EmbeddingTable items;
  std::vector<IndexedRating> train;
  std::vector<IndexedRating> validation;
  std::vector<double> user_autoencoder_loss;
  std::vector<double> item_autoencoder_loss;
};

struct DualTrainerState {
  RecommenderModel rs_a;
  RecommenderModel rs_b;
  OrthogonalMap mapping;
  DomainState a;
  DomainState b;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> overlap;  // user index in A, in B
  std::size_t epoch = 0;
  std::vector<EpochRecord> history;
  bool converged = false;
  // Worst ||X X^T - I||_F over all mapping updates so far.
  double max_orthogonality_defect = 0.0;
  std::size_t mapping_updates = 0;

  const DomainState& domain(DomainTag tag) const { return tag == DomainTag::kA ? a : b; }
  const RecommenderModel& recommender(DomainTag tag) const {
    return tag == DomainTag::kA ? rs_a : rs_b;
  }
};

// Splits validation ratings off, builds embeddings (autoencoders trained once
// per domain and entity kind, then frozen; or free id tables), and sets up
// both recommenders with X = I.
DualTrainerState initialize_state(const DomainDataset& a, const DomainDataset& b,
                                  const OverlapRegistry& registry, const TrainConfig& cfg);

// One pass of within-domain training, mapping update on overlap pairs and
// cross-domain training, in that order. Appends one history record.
DualTrainerState run_epoch(DualTrainerState state, const TrainConfig& cfg);

// run_epoch until has_converged or max_epochs.
DualTrainerState train(const DomainDataset& a, const DomainDataset& b,
                       const OverlapRegistry& registry, const TrainConfig& cfg);

// |last - previous| < eps; false with fewer than two entries.
bool has_converged(std::span<const double> losses, double eps);
bool has_converged(std::span<const EpochRecord> history, double eps);

// Within-domain prediction RS_d(W_u, W_i). Throws LookupError for unknown ids.
double predict_final(const DualTrainerState& state, DomainTag domain, const std::string& user_id,
                     const std::string& item_id);

void write_history(std::span<const EpochRecord> history, const std::filesystem::path& file);

}  // namespace dml

#endif  // DML_TRAINER_HPP_
