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

#ifndef DML_NMF_HPP_
#define DML_NMF_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dml/tensor.hpp"

namespace dml {

struct ConditionReport {
  bool a = false;  // 2 alpha - 1 < 0
  bool b = false;  // (1 - alpha) V_B - alpha X^T V_A >= 0 entrywise
  bool c = false;  // (1 - alpha) V_A - alpha X V_B >= 0 entrywise

  bool all() const noexcept { return a && b && c; }
};

std::string to_string(const ConditionReport& report);

// X is n x n for n x d rating matrices.
ConditionReport check_conditions(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha);

Matrix positive_perturbation(const Matrix& v, std::size_t m, double k_scale);

// Numerical rank from singular values.
std::size_t matrix_rank(const Matrix& x, double rel_tolerance = 1e-10);

struct EffectiveTargets {
  Matrix t_a;
  Matrix t_b;
};

// Throws ValidationError("singular-mixing") when alpha == 0.5.
EffectiveTargets effective_targets(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha);

constexpr double kMuEpsilon = 1e-12;

std::pair<Matrix, Matrix> mu_step(const Matrix& t, const Matrix& w, const Matrix& h);

double nmf_objective(const Matrix& t, const Matrix& w, const Matrix& h);

// Squared-Frobenius coupled objective over both domains.
double coupled_objective(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha,
                         const Matrix& p_a, const Matrix& p_b);

struct NmfOptions {
  std::size_t rank = 3;
  std::size_t iterations = 500;
  double k_scale = 1.0;
  // Stop early once the relative objective change drops below this.
  double tolerance = 0.0;
  std::uint64_t seed = 0;
};

struct NmfState {
  Matrix v_a;
  Matrix v_b;
  Matrix x;
  double alpha = 0.0;
  std::size_t m = 0;
  double k_scale = 1.0;
  double perturbation = 0.0;  // offset added to every entry, 0 when none
  ConditionReport raw_conditions;
  ConditionReport conditions;  // on the inputs actually factorized
  Matrix t_a;
  Matrix t_b;
  Matrix w_a, h_a, w_b, h_b;
  Matrix reconstruction_a;  // approximations of the original V_A, V_B
  Matrix reconstruction_b;
  std::vector<double> loss_history;  // entry 0 is the initial objective
};

// Throws ValidationError("condition-a-violated") when 2 alpha - 1 >= 0.
NmfState run_dual_nmf(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha,
                      const NmfOptions& options);

struct NmfInstance {
  Matrix v_a;
  Matrix v_b;
  Matrix x;  // permutation
};

// V_A uniform on [0, 1]; V_B = X^T V_A plus N(0, noise) clipped to [0, 1]
// for a random permutation X.
NmfInstance coupled_instance(std::size_t rows, std::size_t cols, double noise, std::uint64_t seed);

bool is_non_increasing(const std::vector<double>& history, double slack = 0.0);
// |f_T - f_{T-1}| / f_0
double final_relative_change(const std::vector<double>& history);

void write_nmf_history(const std::vector<double>& history, const std::filesystem::path& file);

}  // namespace dml

#endif  // DML_NMF_HPP_
