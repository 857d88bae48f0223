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

#ifndef DML_EMBEDDINGS_HPP_
#define DML_EMBEDDINGS_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dml/data.hpp"
#include "dml/mlp.hpp"
#include "dml/tensor.hpp"

namespace dml {

// v if ||v|| <= 1, else v / ||v||.
Vector project_unit_ball(std::span<const double> v);

// Pulls a gradient taken with respect to project_unit_ball(raw) back to raw.
Vector project_unit_ball_backward(std::span<const double> raw, std::span<const double> grad);

struct AutoencoderConfig {
  std::size_t latent_dim = 16;
  std::vector<std::size_t> hidden = {32, 16};  // encoder order; decoder mirrors it
  std::size_t epochs = 50;
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

// MLP encoder/decoder pair with the encoder output constrained to the unit
// ball. Hidden layers use tanh, output layers are linear.
class Autoencoder {
 public:
  Autoencoder() = default;
  Autoencoder(std::size_t input_dim, const AutoencoderConfig& cfg);
  Autoencoder(Mlp encoder, Mlp decoder);

  std::size_t input_dim() const { return encoder_.input_dim(); }
  std::size_t latent_dim() const { return encoder_.output_dim(); }

  Vector encode(std::span<const double> features) const;
  Vector decode(std::span<const double> embedding) const;

  // Mean over samples of ||x - dec(enc(x))||^2.
  double reconstruction_loss(std::span<const Vector> batch) const;
  // Adds d(loss)/d(params) of the batch mean into the two gradients; returns
  // the batch loss.
  double accumulate_gradient(std::span<const Vector> batch, MlpGradient& encoder_grad,
                             MlpGradient& decoder_grad) const;

  const Mlp& encoder() const noexcept { return encoder_; }
  const Mlp& decoder() const noexcept { return decoder_; }
  Mlp& encoder() noexcept { return encoder_; }
  Mlp& decoder() noexcept { return decoder_; }

  Vector parameters() const;
  void set_parameters(std::span<const double> flat);

  friend bool operator==(const Autoencoder&, const Autoencoder&) = default;

 private:
  Mlp encoder_;
  Mlp decoder_;
};

struct AutoencoderFit {
  Autoencoder model;
  std::vector<double> loss_history;  // full-data loss after each epoch
};

// Mini-batch gradient descent on the reconstruction loss of one domain's
// feature vectors for one entity kind.
AutoencoderFit train_autoencoder(std::span<const Vector> features, const AutoencoderConfig& cfg);

// Row-per-entity embedding storage aligned with a DomainIndex.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::size_t rows, std::size_t dim) : values_(rows, dim) {}

  std::size_t rows() const noexcept { return values_.rows(); }
  std::size_t dim() const noexcept { return values_.cols(); }
  std::span<const double> row(std::size_t i) const { return values_.row(i); }
  std::span<double> row(std::size_t i) { return values_.row(i); }
  const Matrix& matrix() const noexcept { return values_; }

  // Gradient step on one row followed by unit-ball projection.
  void step(std::size_t i, std::span<const double> grad, double lr);

  friend bool operator==(const EmbeddingTable&, const EmbeddingTable&) = default;

 private:
  Matrix values_;
};

// Encodes every id in `ids` using its feature vector.
EmbeddingTable encode_all(const Autoencoder& model, const std::vector<std::string>& ids,
                          const FeatureMap& features);

// Free per-id embeddings for the feature-free mode: uniform in [-0.1, 0.1]
// then projected. They are trained jointly with the recommender.
EmbeddingTable embed_ids_only(std::size_t count, std::size_t dim, std::uint64_t seed);

void save_embeddings(const EmbeddingTable& table, const std::vector<std::string>& ids,
                     const std::filesystem::path& file);
// Returns ids (file order) and the table.
std::pair<std::vector<std::string>, EmbeddingTable> load_embeddings(
    const std::filesystem::path& file);

}  // namespace dml

#endif  // DML_EMBEDDINGS_HPP_
