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

#ifndef DML_RECSYS_HPP_
#define DML_RECSYS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dml/mapping.hpp"
#include "dml/mlp.hpp"
#include "dml/rng.hpp"

namespace dml {

struct RecommenderConfig {
  std::size_t embedding_dim = 16;
  std::vector<std::size_t> hidden = {32, 16};
  double dropout_rate = 0.1;
  std::uint64_t seed = 0;
};

// One training example. The spans must outlive the call they are passed to.
struct RatingExample {
  std::span<const double> user;
  std::span<const double> item;
  double rating = 0.0;
};

// r_hat = logistic(mlp(concat(user, item))), mlp = 2k -> hidden... -> 1 with
// tanh hidden units and inverted dropout on hidden outputs during training.
class RecommenderModel {
 public:
  RecommenderModel() = default;
  explicit RecommenderModel(const RecommenderConfig& cfg);
  RecommenderModel(Mlp network, double dropout_rate);

  std::size_t embedding_dim() const { return network_.input_dim() / 2; }
  double dropout_rate() const noexcept { return dropout_rate_; }
  void set_dropout_rate(double rate);

  const Mlp& network() const noexcept { return network_; }
  Mlp& network() noexcept { return network_; }

  // Inference path, dropout off.
  double predict(std::span<const double> user, std::span<const double> item) const;

  // Mean squared error of the batch with dropout masks drawn from `rng`
  // (ignored when null or the rate is zero). Parameter gradients are added to
  // `grad`; when `input_grads` is non-null it receives dL/d(user) and
  // dL/d(item) per example, concatenated.
  double accumulate_gradient(std::span<const RatingExample> batch, MlpGradient& grad, Rng* rng,
                             std::vector<Vector>* input_grads = nullptr) const;

  // Inference-mode mean squared error.
  double batch_loss(std::span<const RatingExample> batch) const;

  friend bool operator==(const RecommenderModel&, const RecommenderModel&) = default;

 private:
  void check(std::span<const double> user, std::span<const double> item) const;

  Mlp network_;
  double dropout_rate_ = 0.0;
};

// One gradient step on the batch MSE; dropout masks are seeded by `seed`.
// Returns the loss measured in the same (pre-step) forward pass.
double train_step(RecommenderModel& model, std::span<const RatingExample> batch, double lr,
                  std::uint64_t seed);

enum class MapDirection { kForward, kInverse };

// Cross-domain step: user embeddings are first mapped through X (or X^T),
// then the recommender alone is updated. X is never modified here.
double train_cross_step(RecommenderModel& model, const OrthogonalMap& x, MapDirection direction,
                        std::span<const RatingExample> batch, double lr, std::uint64_t seed);

// Text checkpoint: one tensor per line, `name,rows,cols,values...`.
void save_checkpoint(const RecommenderModel& model, const std::filesystem::path& file);
RecommenderModel load_checkpoint(const std::filesystem::path& file);

}  // namespace dml

#endif  // DML_RECSYS_HPP_
