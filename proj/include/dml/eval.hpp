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

#ifndef DML_EVAL_HPP_
#define DML_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dml/data.hpp"
#include "dml/trainer.hpp"

namespace dml {

constexpr double kRelevanceThreshold = 0.75;

double rmse(std::span<const double> pred, std::span<const double> truth);
double mae(std::span<const double> pred, std::span<const double> truth);

struct ScoredItem {
  std::string item_id;
  double predicted = 0.0;
};

struct UserRanking {
  std::vector<ScoredItem> items;     // the user's test items with predictions
  std::vector<std::string> relevant; // subset of the item ids
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

// Users without relevant items count toward precision only.
PrecisionRecall precision_recall_at_k(std::span<const UserRanking> users, std::size_t k = 5);

// Top-k item ids by prediction, ties by ascending id.
std::vector<std::string> top_k(const UserRanking& user, std::size_t k);

enum class Direction { kLowerBetter, kHigherBetter };

double improvement_pct(double ours, double baseline, Direction direction);

struct TTestResult {
  double t = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t df = 0;
  double mean_difference = 0.0;
};

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

struct MetricsReport {
  std::string domain;
  double rmse = 0.0;
  double mae = 0.0;
  double precision_at_k = 0.0;
  double recall_at_k = 0.0;
  std::size_t k = 5;
  std::size_t n_test = 0;

  // Throws ValidationError when a bound is broken.
  void validate() const;
  double metric(const std::string& name) const;
};

const std::vector<std::string>& metric_names();

// `predict` returns nullopt for pairs it cannot score; those are skipped.
using Predictor = std::function<std::optional<double>(const std::string& user, const std::string& item)>;
MetricsReport evaluate_predictions(const std::string& domain, const std::vector<RatingRecord>& test,
                                   const Predictor& predict, std::size_t k = 5);

// Ratings with ids unknown to the trained state are skipped.
MetricsReport evaluate(const DualTrainerState& state, DomainTag tag,
                       const std::vector<RatingRecord>& test, std::size_t k = 5);

struct RunResult {
  MetricsReport a;
  MetricsReport b;
  double seconds = 0.0;
  std::size_t epochs = 0;
  bool converged = false;
};

RunResult train_and_evaluate(const DomainDataset& train_a, const DomainDataset& train_b,
                             const OverlapRegistry& registry, const DomainDataset& test_a,
                             const DomainDataset& test_b, const TrainConfig& cfg);

struct CrossvalResult {
  std::vector<RunResult> folds;
  MetricsReport mean_a;
  MetricsReport mean_b;
  MetricsReport std_a;
  MetricsReport std_b;
};

CrossvalResult crossval(const DomainDataset& a, const DomainDataset& b, const OverlapRegistry& registry,
                        const TrainConfig& cfg, std::size_t folds = 5, std::size_t jobs = 1);

// Held-out split used by the sweep drivers.
constexpr double kTestFraction = 0.2;

RunResult holdout_run(const DomainDataset& a, const DomainDataset& b, const OverlapRegistry& registry,
                      const TrainConfig& cfg);

struct CurvePoint {
  double x = 0.0;
  std::uint64_t seed = 0;
  RunResult result;
};

struct AblationCurve {
  std::string x_name;
  std::vector<CurvePoint> points;

  std::vector<double> xs() const;
  // Mean over seeds of a metric at x; domain "A", "B" or "mean" (of the two).
  double mean_metric(double x, const std::string& domain, const std::string& metric) const;
  std::vector<double> values(double x, const std::string& domain, const std::string& metric) const;
  double mean_seconds(double x) const;
};

// Runs fn(0..n-1) on up to `jobs` threads.
void run_parallel(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

AblationCurve ablate_overlap(const DomainDataset& a, const DomainDataset& b,
                             const OverlapRegistry& registry, const std::vector<std::size_t>& counts,
                             SubsampleMode mode, const std::vector<std::uint64_t>& seeds,
                             const TrainConfig& cfg, std::size_t jobs = 1);

AblationCurve sweep_dimension(const DomainDataset& a, const DomainDataset& b,
                              const OverlapRegistry& registry, const std::vector<std::size_t>& dims,
                              const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg,
                              std::size_t jobs = 1);

// Two ratings per user and a halved RS step: the regime where the other
// domain's ratings carry information the within-domain model lacks.
struct Preset {
  SyntheticConfig synth;
  TrainConfig train;
};
Preset sparse_preset();

// Both domains get `records` ratings each; users, items and overlap scale with it.
SyntheticConfig scaled_synthetic(const SyntheticConfig& base, std::size_t records);

AblationCurve sweep_scalability(const std::vector<std::size_t>& sizes, const SyntheticConfig& base,
                                const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg,
                                std::size_t max_records = 100000);

struct PowerLawFit {
  double exponent = 0.0;
  double log_intercept = 0.0;
};

// Least squares on (log x, log y).
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

struct FeatureModeRow {
  std::uint64_t seed = 0;
  RunResult features;
  RunResult ids_only;
};

std::vector<FeatureModeRow> feature_mode_comparison(const DomainDataset& a, const DomainDataset& b,
                                                    const OverlapRegistry& registry,
                                                    const std::vector<std::uint64_t>& seeds,
                                                    const TrainConfig& cfg, std::size_t jobs = 1);

void write_metrics(const std::string& run_id, std::span<const MetricsReport> reports,
                   const std::filesystem::path& file, bool append = false);
void write_curve(const AblationCurve& curve, const std::filesystem::path& file);

}  // namespace dml

#endif  // DML_EVAL_HPP_
