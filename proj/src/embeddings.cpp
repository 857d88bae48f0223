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

#include "dml/embeddings.hpp"

#include <cmath>
#include <numeric>

#include "dml/csv.hpp"
#include "dml/error.hpp"
#include "dml/rng.hpp"

namespace dml {

Vector project_unit_ball(std::span<const double> v) {
  Vector out(v.begin(), v.end());
  const double len = norm(v);
  if (len > 1.0) {
    for (double& x : out) x /= len;
  }
  return out;
}

Vector project_unit_ball_backward(std::span<const double> raw, std::span<const double> grad) {
  const double len = norm(raw);
  Vector out(grad.begin(), grad.end());
  if (len <= 1.0) return out;
  // d(v/|v|) = (I - p p^T) / |v|
  double pg = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) pg += raw[i] * grad[i];
  pg /= len;
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (grad[i] - raw[i] / len * pg) / len;
  return out;
}

Autoencoder::Autoencoder(std::size_t input_dim, const AutoencoderConfig& cfg) {
  if (input_dim == 0 || cfg.latent_dim == 0) throw ValidationError("autoencoder dims must be positive");
  std::vector<std::size_t> enc{input_dim};
  enc.insert(enc.end(), cfg.hidden.begin(), cfg.hidden.end());
  enc.push_back(cfg.latent_dim);
  std::vector<std::size_t> dec(enc.rbegin(), enc.rend());
  Rng rng(derive_seed(cfg.seed, 0xae));
  encoder_ = Mlp(enc, Activation::kTanh, Activation::kIdentity, rng);
  decoder_ = Mlp(dec, Activation::kTanh, Activation::kIdentity, rng);
}

Autoencoder::Autoencoder(Mlp encoder, Mlp decoder)
    : encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
  if (encoder_.output_dim() != decoder_.input_dim() ||
      encoder_.input_dim() != decoder_.output_dim()) {
    throw ShapeError("encoder/decoder dimensions do not chain");
  }
}

Vector Autoencoder::encode(std::span<const double> features) const {
  if (features.size() != input_dim()) {
    throw ShapeError("encode: feature vector has " + std::to_string(features.size()) +
                     " entries, model expects " + std::to_string(input_dim()));
  }
  return project_unit_ball(encoder_.forward(features));
}

Vector Autoencoder::decode(std::span<const double> embedding) const {
  if (embedding.size() != latent_dim()) {
    throw ShapeError("decode: embedding has " + std::to_string(embedding.size()) +
                     " entries, model expects " + std::to_string(latent_dim()));
  }
  return decoder_.forward(embedding);
}

double Autoencoder::reconstruction_loss(std::span<const Vector> batch) const {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& x : batch) total += squared_distance(x, decode(encode(x)));
  return total / static_cast<double>(batch.size());
}

double Autoencoder::accumulate_gradient(std::span<const Vector> batch, MlpGradient& encoder_grad,
                                        MlpGradient& decoder_grad) const {
  if (batch.empty()) return 0.0;
  const double inv = 1.0 / static_cast<double>(batch.size());
  ForwardTape enc_tape;
  ForwardTape dec_tape;
  Vector grad_out;
  double total = 0.0;
  for (const auto& x : batch) {
    if (x.size() != input_dim()) throw ShapeError("autoencoder batch dimension mismatch");
    const auto raw_span = encoder_.forward(x, enc_tape, 0.0, nullptr);
    const Vector raw(raw_span.begin(), raw_span.end());
    const Vector code = project_unit_ball(raw);
    const auto recon = decoder_.forward(code, dec_tape, 0.0, nullptr);
    grad_out.resize(recon.size());
    for (std::size_t i = 0; i < recon.size(); ++i) {
      const double diff = recon[i] - x[i];
      total += diff * diff;
      grad_out[i] = 2.0 * diff * inv;
    }
    const Vector grad_code = decoder_.backward(dec_tape, grad_out, decoder_grad);
    const Vector grad_raw = project_unit_ball_backward(raw, grad_code);
    encoder_.backward(enc_tape, grad_raw, encoder_grad);
  }
  return total * inv;
}

Vector Autoencoder::parameters() const {
  Vector p = encoder_.parameters();
  const Vector d = decoder_.parameters();
  p.insert(p.end(), d.begin(), d.end());
  return p;
}

void Autoencoder::set_parameters(std::span<const double> flat) {
  const std::size_t ne = encoder_.parameter_count();
  if (flat.size() != ne + decoder_.parameter_count()) throw ShapeError("autoencoder parameter count");
  encoder_.set_parameters(flat.subspan(0, ne));
  decoder_.set_parameters(flat.subspan(ne));
}

AutoencoderFit train_autoencoder(std::span<const Vector> features, const AutoencoderConfig& cfg) {
  if (features.empty()) throw ValidationError("train_autoencoder: no feature vectors");
  const std::size_t dim = features.front().size();
  for (const auto& f : features) {
    if (f.size() != dim) throw ShapeError("train_autoencoder: inconsistent feature dimensions");
  }
  if (cfg.batch_size == 0) throw ValidationError("batch size must be positive");

  AutoencoderFit fit{Autoencoder(dim, cfg), {}};
  Autoencoder& model = fit.model;
  MlpGradient enc_grad = model.encoder().make_gradient();
  MlpGradient dec_grad = model.decoder().make_gradient();
  Rng rng(derive_seed(cfg.seed, 0xb0));
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Vector> batch;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(features[order[i]]);
      enc_grad.zero();
      dec_grad.zero();
      model.accumulate_gradient(batch, enc_grad, dec_grad);
      model.encoder().apply_gradient(enc_grad, cfg.learning_rate);
      model.decoder().apply_gradient(dec_grad, cfg.learning_rate);
    }
    const double loss = model.reconstruction_loss(features);
    if (!std::isfinite(loss)) {
      throw NumericError("autoencoder reconstruction loss diverged at epoch " +
                         std::to_string(epoch + 1));
    }
    fit.loss_history.push_back(loss);
  }
  return fit;
}

void EmbeddingTable::step(std::size_t i, std::span<const double> grad, double lr) {
  auto r = values_.row(i);
  for (std::size_t j = 0; j < r.size(); ++j) r[j] -= lr * grad[j];
  const double len = norm(r);
  if (len > 1.0) {
    for (double& x : r) x /= len;
  }
}

EmbeddingTable encode_all(const Autoencoder& model, const std::vector<std::string>& ids,
                          const FeatureMap& features) {
  EmbeddingTable table(ids.size(), model.latent_dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = features.find(ids[i]);
    if (it == features.end()) throw LookupError("no feature vector for '" + ids[i] + "'");
    const Vector e = model.encode(it->second);
    std::copy(e.begin(), e.end(), table.row(i).begin());
  }
  return table;
}

EmbeddingTable embed_ids_only(std::size_t count, std::size_t dim, std::uint64_t seed) {
  EmbeddingTable table(count, dim);
  Rng rng(derive_seed(seed, 0x1d));
  for (std::size_t i = 0; i < count; ++i) {
    auto r = table.row(i);
    for (double& x : r) x = rng.uniform(-0.1, 0.1);
    const Vector p = project_unit_ball(r);
    std::copy(p.begin(), p.end(), r.begin());
  }
  return table;
}

void save_embeddings(const EmbeddingTable& table, const std::vector<std::string>& ids,
                     const std::filesystem::path& file) {
  if (ids.size() != table.rows()) throw ShapeError("save_embeddings: id count != rows");
  auto out = csv::open_output(file);
  out << "owner_id";
  for (std::size_t j = 1; j <= table.dim(); ++j) out << ",e" << j;
  out << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (double x : table.row(i)) out << ',' << csv::format_double(x);
    out << '\n';
  }
}

std::pair<std::vector<std::string>, EmbeddingTable> load_embeddings(
    const std::filesystem::path& file) {
  const auto lines = csv::read_lines(file);
  if (lines.empty() || csv::split(lines[0]).front() != "owner_id") {
    throw ParseError(file.string(), 1, "expected header owner_id,e1..ek");
  }
  const std::size_t dim = csv::split(lines[0]).size() - 1;
  std::vector<std::string> ids;
  std::vector<Vector> rows;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto cols = csv::split(lines[n]);
    if (cols.size() != dim + 1) throw ParseError(file.string(), n + 1, "wrong field count");
    Vector v(dim);
    for (std::size_t j = 0; j < dim; ++j) v[j] = csv::parse_double(cols[j + 1], file.string(), n + 1);
    ids.push_back(cols[0]);
    rows.push_back(std::move(v));
  }
  EmbeddingTable table(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), table.row(i).begin());
  return {std::move(ids), std::move(table)};
}

}  // namespace dml
