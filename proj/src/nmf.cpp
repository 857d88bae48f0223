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

#include "dml/nmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dml/csv.hpp"
#include "dml/error.hpp"
#include "dml/rng.hpp"

namespace dml {
namespace {

void require_square_map(const Matrix& v, const Matrix& x) {
  if (x.rows() != x.cols() || x.cols() != v.rows()) {
    throw ShapeError("mixing matrix is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                     ", ratings have " + std::to_string(v.rows()) + " rows");
  }
}

void require_nonnegative(const Matrix& m, const char* what) {
  for (double v : m.values()) {
    if (!(v >= 0.0)) throw ValidationError(std::string(what) + " has a negative or NaN entry");
  }
}

bool all_nonnegative(const Matrix& m) {
  return std::all_of(m.values().begin(), m.values().end(), [](double v) { return v >= 0.0; });
}

Matrix mix(const Matrix& own, const Matrix& other, double alpha) {
  return subtract(scale(own, 1.0 - alpha), scale(other, alpha));
}

Matrix random_factor(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  // uniform in (0, 1]
  for (double& v : m.values()) v = 1.0 - rng.uniform(0.0, 1.0);
  return m;
}

}  // namespace

std::string to_string(const ConditionReport& r) {
  auto flag = [](bool v) { return v ? "true" : "false"; };
  return std::string("a=") + flag(r.a) + " b=" + flag(r.b) + " c=" + flag(r.c);
}

ConditionReport check_conditions(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha) {
  if (v_a.rows() != v_b.rows() || v_a.cols() != v_b.cols()) {
    throw ShapeError("V_A and V_B differ in shape");
  }
  require_square_map(v_a, x);
  ConditionReport r;
  r.a = 2.0 * alpha - 1.0 < 0.0;
  r.b = all_nonnegative(mix(v_b, matmul(transpose(x), v_a), alpha));
  r.c = all_nonnegative(mix(v_a, matmul(x, v_b), alpha));
  return r;
}

Matrix positive_perturbation(const Matrix& v, std::size_t m, double k_scale) {
  Matrix out = v;
  const double offset = static_cast<double>(m) * k_scale;
  for (double& e : out.values()) e += offset;
  return out;
}

std::size_t matrix_rank(const Matrix& x, double rel_tolerance) {
  if (x.rows() == 0 || x.cols() == 0) return 0;
  const Svd svd = jacobi_svd(x);
  if (svd.sigma.empty() || svd.sigma.front() == 0.0) return 0;
  const double cut = svd.sigma.front() * rel_tolerance;
  return static_cast<std::size_t>(
      std::count_if(svd.sigma.begin(), svd.sigma.end(), [cut](double s) { return s > cut; }));
}

EffectiveTargets effective_targets(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha) {
  if (v_a.rows() != v_b.rows() || v_a.cols() != v_b.cols()) {
    throw ShapeError("V_A and V_B differ in shape");
  }
  require_square_map(v_a, x);
  const double denom = 1.0 - 2.0 * alpha;
  if (denom == 0.0) throw ValidationError("singular-mixing", "alpha = 0.5 makes the mixing singular");
  return {scale(mix(v_a, matmul(x, v_b), alpha), 1.0 / denom),
          scale(mix(v_b, matmul(transpose(x), v_a), alpha), 1.0 / denom)};
}

std::pair<Matrix, Matrix> mu_step(const Matrix& t, const Matrix& w, const Matrix& h) {
  if (w.rows() != t.rows() || h.cols() != t.cols() || w.cols() != h.rows()) {
    throw ShapeError("factor shapes do not match the target");
  }
  require_nonnegative(t, "target");
  require_nonnegative(w, "W");
  require_nonnegative(h, "H");

  const Matrix wt = transpose(w);
  const Matrix h_num = matmul(wt, t);
  const Matrix h_den = matmul(matmul(wt, w), h);
  Matrix h_next = h;
  for (std::size_t i = 0; i < h.values().size(); ++i) {
    h_next.values()[i] *= h_num.values()[i] / (h_den.values()[i] + kMuEpsilon);
  }

  const Matrix ht = transpose(h_next);
  const Matrix w_num = matmul(t, ht);
  const Matrix w_den = matmul(w, matmul(h_next, ht));
  Matrix w_next = w;
  for (std::size_t i = 0; i < w.values().size(); ++i) {
    w_next.values()[i] *= w_num.values()[i] / (w_den.values()[i] + kMuEpsilon);
  }
  return {std::move(w_next), std::move(h_next)};
}

double nmf_objective(const Matrix& t, const Matrix& w, const Matrix& h) {
  const double d = frobenius_distance(t, matmul(w, h));
  return d * d;
}

double coupled_objective(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha,
                         const Matrix& p_a, const Matrix& p_b) {
  const Matrix model_a = add(scale(p_a, 1.0 - alpha), scale(matmul(x, p_b), alpha));
  const Matrix model_b = add(scale(p_b, 1.0 - alpha), scale(matmul(transpose(x), p_a), alpha));
  const double ra = frobenius_distance(v_a, model_a);
  const double rb = frobenius_distance(v_b, model_b);
  return ra * ra + rb * rb;
}

NmfState run_dual_nmf(const Matrix& v_a, const Matrix& v_b, const Matrix& x, double alpha,
                      const NmfOptions& options) {
  if (options.rank < 1) throw ValidationError("rank must be at least 1");
  require_nonnegative(v_a, "V_A");
  require_nonnegative(v_b, "V_B");

  NmfState s;
  s.v_a = v_a;
  s.v_b = v_b;
  s.x = x;
  s.alpha = alpha;
  s.k_scale = options.k_scale;
  s.raw_conditions = check_conditions(v_a, v_b, x, alpha);
  if (!s.raw_conditions.a) {
    throw ValidationError("condition-a-violated",
                          "2*alpha - 1 must be negative (" + to_string(s.raw_conditions) + ")");
  }
  s.m = matrix_rank(x);

  Matrix pa = v_a;
  Matrix pb = v_b;
  s.conditions = s.raw_conditions;
  if (!s.raw_conditions.b || !s.raw_conditions.c) {
    pa = positive_perturbation(v_a, s.m, s.k_scale);
    pb = positive_perturbation(v_b, s.m, s.k_scale);
    s.perturbation = static_cast<double>(s.m) * s.k_scale;
    s.conditions = check_conditions(pa, pb, x, alpha);
    if (!s.conditions.b) {
      throw ValidationError("condition-b-violated", "perturbed inputs fail (" + to_string(s.conditions) + ")");
    }
    if (!s.conditions.c) {
      throw ValidationError("condition-c-violated", "perturbed inputs fail (" + to_string(s.conditions) + ")");
    }
  }

  auto targets = effective_targets(pa, pb, x, alpha);
  s.t_a = std::move(targets.t_a);
  s.t_b = std::move(targets.t_b);

  Rng rng(derive_seed(options.seed, 0x6e6d66));
  s.w_a = random_factor(s.t_a.rows(), options.rank, rng);
  s.h_a = random_factor(options.rank, s.t_a.cols(), rng);
  s.w_b = random_factor(s.t_b.rows(), options.rank, rng);
  s.h_b = random_factor(options.rank, s.t_b.cols(), rng);

  auto objective = [&] {
    return coupled_objective(pa, pb, x, alpha, matmul(s.w_a, s.h_a), matmul(s.w_b, s.h_b));
  };
  s.loss_history.push_back(objective());
  for (std::size_t it = 0; it < options.iterations; ++it) {
    std::tie(s.w_a, s.h_a) = mu_step(s.t_a, s.w_a, s.h_a);
    std::tie(s.w_b, s.h_b) = mu_step(s.t_b, s.w_b, s.h_b);
    const double obj = objective();
    if (!std::isfinite(obj)) throw NumericError("objective diverged at iteration " + std::to_string(it + 1));
    s.loss_history.push_back(obj);
    if (options.tolerance > 0.0 && final_relative_change(s.loss_history) < options.tolerance) break;
  }

  const Matrix p_a = matmul(s.w_a, s.h_a);
  const Matrix p_b = matmul(s.w_b, s.h_b);
  Matrix model_a = add(scale(p_a, 1.0 - alpha), scale(matmul(x, p_b), alpha));
  Matrix model_b = add(scale(p_b, 1.0 - alpha), scale(matmul(transpose(x), p_a), alpha));
  for (double& v : model_a.values()) v -= s.perturbation;
  for (double& v : model_b.values()) v -= s.perturbation;
  s.reconstruction_a = std::move(model_a);
  s.reconstruction_b = std::move(model_b);
  return s;
}

NmfInstance coupled_instance(std::size_t rows, std::size_t cols, double noise,
                             std::uint64_t seed) {
  Rng rng(seed);
  NmfInstance inst;
  inst.v_a = Matrix(rows, cols);
  for (double& v : inst.v_a.values()) v = rng.uniform(0.0, 1.0);
  std::vector<std::size_t> perm(rows);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  inst.x = Matrix(rows, rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i) inst.x(i, perm[i]) = 1.0;
  inst.v_b = matmul(transpose(inst.x), inst.v_a);
  for (double& v : inst.v_b.values()) v = std::clamp(v + rng.normal(0.0, noise), 0.0, 1.0);
  return inst;
}

bool is_non_increasing(const std::vector<double>& history, double slack) {
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i] > history[i - 1] + slack) return false;
  }
  return true;
}

double final_relative_change(const std::vector<double>& history) {
  if (history.size() < 2) return 0.0;
  const double step = std::abs(history.back() - history[history.size() - 2]);
  if (history.front() == 0.0) return step == 0.0 ? 0.0 : 1.0;
  return step / std::abs(history.front());
}

void write_nmf_history(const std::vector<double>& history, const std::filesystem::path& file) {
  auto out = csv::open_output(file);
  out << "iter,objective,delta\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double delta = i == 0 ? 0.0 : history[i] - history[i - 1];
    out << i << ',' << csv::format_double(history[i]) << ',' << csv::format_double(delta) << '\n';
  }
}

}  // namespace dml
