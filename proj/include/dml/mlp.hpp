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

#ifndef DML_MLP_HPP_
#define DML_MLP_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dml/rng.hpp"
#include "dml/tensor.hpp"

namespace dml {

enum class Activation { kTanh, kIdentity };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::kIdentity;
};

struct MlpGradient {
  std::vector<Matrix> weights;
  std::vector<Vector> bias;

  void zero();
  Vector flatten() const;
};

// Per-sample activations recorded by a training forward pass. Buffers are
// reused across calls to avoid reallocating in the inner loop.
struct ForwardTape {
  std::vector<Vector> inputs;   // input seen by each layer
  std::vector<Vector> outputs;  // activation output of each layer, before dropout
  std::vector<Vector> masks;    // inverted-dropout multipliers; empty when inactive
};

// Fully connected network. Hidden layers share one activation, the last layer
// has its own. Dropout, when requested, is applied to hidden outputs only.
class Mlp {
 public:
  Mlp() = default;

  // Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  Mlp(std::span<const std::size_t> sizes, Activation hidden, Activation output, Rng& rng);

  static Mlp from_layers(std::vector<DenseLayer> layers);

  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  std::vector<std::size_t> sizes() const;

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  Vector forward(std::span<const double> x) const;
  // Training pass; records activations into `tape`. `rng` may be null when
  // `dropout_rate` is zero.
  std::span<const double> forward(std::span<const double> x, ForwardTape& tape,
                                  double dropout_rate, Rng* rng) const;
  // Accumulates dL/dparams into `grad` and returns dL/dx.
  Vector backward(const ForwardTape& tape, std::span<const double> grad_output,
                  MlpGradient& grad) const;

  MlpGradient make_gradient() const;
  void apply_gradient(const MlpGradient& grad, double lr);

  Vector parameters() const;
  void set_parameters(std::span<const double> flat);

  friend bool operator==(const Mlp& a, const Mlp& b) { return a.parameters() == b.parameters(); }

 private:
  std::vector<DenseLayer> layers_;
};

}  // namespace dml

#endif  // DML_MLP_HPP_
