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

#include "dml/mlp.hpp"

#include <cmath>

#include "dml/error.hpp"

namespace dml {
namespace {

inline double activate(Activation a, double z) { return a == Activation::kTanh ? std::tanh(z) : z; }

// Derivative expressed through the activation output y.
inline double activate_grad(Activation a, double y) {
  return a == Activation::kTanh ? 1.0 - y * y : 1.0;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "identity"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "identity") return Activation::kIdentity;
  throw ValidationError("unknown activation '" + name + "'");
}

void MlpGradient::zero() {
  for (auto& w : weights) std::fill(w.values().begin(), w.values().end(), 0.0);
  for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
}

Vector MlpGradient::flatten() const {
  Vector out;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.insert(out.end(), weights[l].values().begin(), weights[l].values().end());
    out.insert(out.end(), bias[l].begin(), bias[l].end());
  }
  return out;
}

Mlp::Mlp(std::span<const std::size_t> sizes, Activation hidden, Activation output, Rng& rng) {
  if (sizes.size() < 2) throw ValidationError("mlp needs at least input and output sizes");
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    if (in == 0 || out == 0) throw ValidationError("mlp layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Matrix(out, in), Vector(out),
                     l + 2 == sizes.size() ? output : hidden};
    for (double& w : layer.weights.values()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    layers_.push_back(std::move(layer));
  }
}

Mlp Mlp::from_layers(std::vector<DenseLayer> layers) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].bias.size() != layers[l].weights.rows()) throw ShapeError("bias/weight rows");
    if (l > 0 && layers[l].weights.cols() != layers[l - 1].weights.rows()) {
      throw ShapeError("layer " + std::to_string(l) + " input does not match previous output");
    }
  }
  Mlp m;
  m.layers_ = std::move(layers);
  return m;
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().weights.cols(); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().weights.rows(); }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> Mlp::sizes() const {
  std::vector<std::size_t> s;
  if (layers_.empty()) return s;
  s.push_back(input_dim());
  for (const auto& l : layers_) s.push_back(l.weights.rows());
  return s;
}

Vector Mlp::forward(std::span<const double> x) const {
  if (x.size() != input_dim()) {
    throw ShapeError("mlp input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(input_dim()));
  }
  Vector cur(x.begin(), x.end());
  Vector next;
  for (const auto& layer : layers_) {
    next.assign(layer.weights.rows(), 0.0);
    for (std::size_t o = 0; o < next.size(); ++o) {
      const auto w = layer.weights.row(o);
      double z = layer.bias[o];
      for (std::size_t i = 0; i < cur.size(); ++i) z += w[i] * cur[i];
      next[o] = activate(layer.activation, z);
    }
    cur.swap(next);
  }
  return cur;
}

std::span<const double> Mlp::forward(std::span<const double> x, ForwardTape& tape,
                                     double dropout_rate, Rng* rng) const {
  if (x.size() != input_dim()) {
    throw ShapeError("mlp input has " + std::to_string(x.size()) + " entries, expected " +
                     std::to_string(input_dim()));
  }
  const std::size_t n = layers_.size();
  tape.inputs.resize(n);
  tape.outputs.resize(n);
  tape.masks.resize(n);
  tape.inputs[0].assign(x.begin(), x.end());
  const bool dropout = dropout_rate > 0.0;
  const double keep_scale = dropout ? 1.0 / (1.0 - dropout_rate) : 1.0;
  for (std::size_t l = 0; l < n; ++l) {
    const auto& layer = layers_[l];
    const Vector& in = tape.inputs[l];
    Vector& out = tape.outputs[l];
    out.resize(layer.weights.rows());
    for (std::size_t o = 0; o < out.size(); ++o) {
      const auto w = layer.weights.row(o);
      double z = layer.bias[o];
      for (std::size_t i = 0; i < in.size(); ++i) z += w[i] * in[i];
      out[o] = activate(layer.activation, z);
    }
    if (l + 1 == n) break;
    Vector& next_in = tape.inputs[l + 1];
    next_in = out;
    Vector& mask = tape.masks[l];
    if (dropout) {
      mask.resize(out.size());
      for (std::size_t o = 0; o < out.size(); ++o) {
        mask[o] = rng->bernoulli(dropout_rate) ? 0.0 : keep_scale;
        next_in[o] *= mask[o];
      }
    } else {
      mask.clear();
    }
  }
  return tape.outputs.back();
}

Vector Mlp::backward(const ForwardTape& tape, std::span<const double> grad_output,
                     MlpGradient& grad) const {
  const std::size_t n = layers_.size();
  Vector upstream(grad_output.begin(), grad_output.end());
  Vector delta;
  for (std::size_t l = n; l-- > 0;) {
    const auto& layer = layers_[l];
    const Vector& out = tape.outputs[l];
    const Vector& in = tape.inputs[l];
    delta.resize(out.size());
    for (std::size_t o = 0; o < out.size(); ++o) {
      delta[o] = upstream[o] * activate_grad(layer.activation, out[o]);
    }
    Matrix& gw = grad.weights[l];
    Vector& gb = grad.bias[l];
    for (std::size_t o = 0; o < out.size(); ++o) {
      const double d = delta[o];
      gb[o] += d;
      if (d == 0.0) continue;
      auto row = gw.row(o);
      for (std::size_t i = 0; i < in.size(); ++i) row[i] += d * in[i];
    }
    upstream.assign(in.size(), 0.0);
    for (std::size_t o = 0; o < out.size(); ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const auto w = layer.weights.row(o);
      for (std::size_t i = 0; i < in.size(); ++i) upstream[i] += w[i] * d;
    }
    if (l > 0 && !tape.masks[l - 1].empty()) {
      const Vector& mask = tape.masks[l - 1];
      for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] *= mask[i];
    }
  }
  return upstream;
}

MlpGradient Mlp::make_gradient() const {
  MlpGradient g;
  for (const auto& l : layers_) {
    g.weights.emplace_back(l.weights.rows(), l.weights.cols());
    g.bias.emplace_back(l.bias.size(), 0.0);
  }
  return g;
}

void Mlp::apply_gradient(const MlpGradient& grad, double lr) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    auto& w = layers_[l].weights.values();
    const auto& gw = grad.weights[l].values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
    auto& b = layers_[l].bias;
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * grad.bias[l][i];
  }
}

Vector Mlp::parameters() const {
  Vector out;
  out.reserve(parameter_count());
  for (const auto& l : layers_) {
    out.insert(out.end(), l.weights.values().begin(), l.weights.values().end());
    out.insert(out.end(), l.bias.begin(), l.bias.end());
  }
  return out;
}

void Mlp::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) {
    throw ShapeError("set_parameters: got " + std::to_string(flat.size()) + ", expected " +
                     std::to_string(parameter_count()));
  }
  std::size_t pos = 0;
  for (auto& l : layers_) {
    for (double& w : l.weights.values()) w = flat[pos++];
    for (double& b : l.bias) b = flat[pos++];
  }
}

}  // namespace dml
