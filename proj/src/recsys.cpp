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

#include "dml/recsys.hpp"

#include <cmath>
#include <map>

#include "dml/csv.hpp"
#include "dml/error.hpp"

namespace dml {
namespace {

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

RecommenderModel::RecommenderModel(const RecommenderConfig& cfg) {
  if (cfg.embedding_dim == 0) throw ValidationError("embedding_dim must be positive");
  std::vector<std::size_t> sizes{2 * cfg.embedding_dim};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  Rng rng(derive_seed(cfg.seed, 0x5e));
  network_ = Mlp(sizes, Activation::kTanh, Activation::kIdentity, rng);
  set_dropout_rate(cfg.dropout_rate);
}

RecommenderModel::RecommenderModel(Mlp network, double dropout_rate)
    : network_(std::move(network)) {
  if (network_.output_dim() != 1 || network_.input_dim() % 2 != 0) {
    throw ShapeError("recommender network must map 2k inputs to one output");
  }
  set_dropout_rate(dropout_rate);
}

void RecommenderModel::set_dropout_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("dropout rate must be in [0, 1)");
  dropout_rate_ = rate;
}

void RecommenderModel::check(std::span<const double> user, std::span<const double> item) const {
  const std::size_t k = embedding_dim();
  if (user.size() != k || item.size() != k) {
    throw ShapeError("recommender expects two " + std::to_string(k) + "-dim embeddings, got " +
                     std::to_string(user.size()) + " and " + std::to_string(item.size()));
  }
}

double RecommenderModel::predict(std::span<const double> user, std::span<const double> item) const {
  check(user, item);
  Vector input(user.begin(), user.end());
  input.insert(input.end(), item.begin(), item.end());
  return logistic(network_.forward(input)[0]);
}

double RecommenderModel::accumulate_gradient(std::span<const RatingExample> batch,
                                             MlpGradient& grad, Rng* rng,
                                             std::vector<Vector>* input_grads) const {
  if (batch.empty()) throw ValidationError("empty training batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  const double rate = rng ? dropout_rate_ : 0.0;
  ForwardTape tape;
  Vector input;
  double total = 0.0;
  if (input_grads) input_grads->clear();
  for (const auto& ex : batch) {
    check(ex.user, ex.item);
    input.assign(ex.user.begin(), ex.user.end());
    input.insert(input.end(), ex.item.begin(), ex.item.end());
    const double z = network_.forward(input, tape, rate, rng)[0];
    const double p = logistic(z);
    const double diff = p - ex.rating;
    total += diff * diff;
    const double g = 2.0 * diff * p * (1.0 - p) * inv;
    Vector gin = network_.backward(tape, std::span<const double>(&g, 1), grad);
    if (input_grads) input_grads->push_back(std::move(gin));
  }
  const double loss = total * inv;
  if (!std::isfinite(loss)) throw NumericError("recommender loss is not finite");
  return loss;
}

double RecommenderModel::batch_loss(std::span<const RatingExample> batch) const {
  if (batch.empty()) throw ValidationError("empty batch");
  double total = 0.0;
  for (const auto& ex : batch) {
    const double d = predict(ex.user, ex.item) - ex.rating;
    total += d * d;
  }
  return total / static_cast<double>(batch.size());
}

double train_step(RecommenderModel& model, std::span<const RatingExample> batch, double lr,
                  std::uint64_t seed) {
  MlpGradient grad = model.network().make_gradient();
  Rng rng(seed);
  const double loss = model.accumulate_gradient(batch, grad, &rng);
  model.network().apply_gradient(grad, lr);
  return loss;
}

double train_cross_step(RecommenderModel& model, const OrthogonalMap& x, MapDirection direction,
                        std::span<const RatingExample> batch, double lr, std::uint64_t seed) {
  std::vector<Vector> mapped;
  mapped.reserve(batch.size());
  std::vector<RatingExample> cross;
  cross.reserve(batch.size());
  for (const auto& ex : batch) {
    mapped.push_back(direction == MapDirection::kForward ? map_forward(x, ex.user)
                                                         : map_inverse(x, ex.user));
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    cross.push_back({mapped[i], batch[i].item, batch[i].rating});
  }
  return train_step(model, cross, lr, seed);
}

void save_checkpoint(const RecommenderModel& model, const std::filesystem::path& file) {
  auto out = csv::open_output(file);
  out << "dropout_rate,1,1," << csv::format_double(model.dropout_rate()) << '\n';
  const auto& layers = model.network().layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const Matrix& w = layers[l].weights;
    out << "layer" << l << ".weight," << w.rows() << ',' << w.cols();
    for (double v : w.values()) out << ',' << csv::format_double(v);
    out << '\n';
    out << "layer" << l << ".bias," << layers[l].bias.size() << ",1";
    for (double v : layers[l].bias) out << ',' << csv::format_double(v);
    out << '\n';
  }
}

RecommenderModel load_checkpoint(const std::filesystem::path& file) {
  const auto lines = csv::read_lines(file);
  std::map<std::string, Matrix> tensors;
  for (std::size_t n = 0; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto cols = csv::split(lines[n]);
    if (cols.size() < 3) throw ParseError(file.string(), n + 1, "expected name,rows,cols,values...");
    const auto rows = static_cast<std::size_t>(csv::parse_int(cols[1], file.string(), n + 1));
    const auto ncols = static_cast<std::size_t>(csv::parse_int(cols[2], file.string(), n + 1));
    if (cols.size() != 3 + rows * ncols) {
      throw ParseError(file.string(), n + 1, "tensor '" + cols[0] + "' has wrong value count");
    }
    std::vector<double> values;
    values.reserve(rows * ncols);
    for (std::size_t i = 3; i < cols.size(); ++i) values.push_back(csv::parse_double(cols[i], file.string(), n + 1));
    tensors.emplace(cols[0], Matrix(rows, ncols, std::move(values)));
  }
  double dropout = 0.0;
  if (auto it = tensors.find("dropout_rate"); it != tensors.end()) dropout = it->second(0, 0);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0;; ++l) {
    const auto w = tensors.find("layer" + std::to_string(l) + ".weight");
    const auto b = tensors.find("layer" + std::to_string(l) + ".bias");
    if (w == tensors.end() || b == tensors.end()) break;
    layers.push_back({w->second, b->second.values(), Activation::kTanh});
  }
  if (layers.empty()) throw ParseError(file.string(), 1, "checkpoint has no layers");
  layers.back().activation = Activation::kIdentity;
  return RecommenderModel(Mlp::from_layers(std::move(layers)), dropout);
}

}  // namespace dml
