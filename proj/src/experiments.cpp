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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include "dml/csv.hpp"
#include "dml/error.hpp"
#include "dml/eval.hpp"
#include "dml/rng.hpp"

namespace dml {
namespace {

constexpr std::uint64_t kSplitStream = 0x7e57;
constexpr std::uint64_t kFoldStream = 0xf01d;

OverlapRegistry restrict_registry(const OverlapRegistry& reg, const DomainDataset& a,
                                  const DomainDataset& b) {
  const auto ua = a.user_ids();
  const auto ub = b.user_ids();
  OverlapRegistry out;
  for (const auto& p : reg.pairs) {
    if (std::binary_search(ua.begin(), ua.end(), p.a) && std::binary_search(ub.begin(), ub.end(), p.b)) {
      out.pairs.push_back(p);
    }
  }
  return out;
}

struct Split {
  DomainDataset train_a, test_a, train_b, test_b;
};

Split holdout(const DomainDataset& a, const DomainDataset& b, std::uint64_t seed) {
  Split s;
  std::tie(s.train_a, s.test_a) = holdout_split(a, kTestFraction, derive_seed(seed, kSplitStream));
  std::tie(s.train_b, s.test_b) = holdout_split(b, kTestFraction, derive_seed(seed, kSplitStream + 1));
  return s;
}

MetricsReport combine(const std::vector<MetricsReport>& reports, bool stddev) {
  MetricsReport out;
  out.domain = reports.front().domain;
  out.k = reports.front().k;
  const auto n = static_cast<double>(reports.size());
  auto field = [&](double MetricsReport::*f) {
    double mean = 0.0;
    for (const auto& r : reports) mean += r.*f;
    mean /= n;
    if (!stddev) return mean;
    double var = 0.0;
    for (const auto& r : reports) var += (r.*f - mean) * (r.*f - mean);
    return reports.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
  };
  out.rmse = field(&MetricsReport::rmse);
  out.mae = field(&MetricsReport::mae);
  out.precision_at_k = field(&MetricsReport::precision_at_k);
  out.recall_at_k = field(&MetricsReport::recall_at_k);
  std::size_t total = 0;
  for (const auto& r : reports) total += r.n_test;
  out.n_test = total / reports.size();
  return out;
}

const MetricsReport& pick(const RunResult& r, const std::string& domain) {
  if (domain == "A") return r.a;
  if (domain == "B") return r.b;
  throw ValidationError("unknown domain '" + domain + "'");
}

}  // namespace

void run_parallel(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

RunResult train_and_evaluate(const DomainDataset& train_a, const DomainDataset& train_b,
                             const OverlapRegistry& registry, const DomainDataset& test_a,
                             const DomainDataset& test_b, const TrainConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const DualTrainerState state = train(train_a, train_b, restrict_registry(registry, train_a, train_b), cfg);
  const auto stop = std::chrono::steady_clock::now();
  RunResult r;
  r.seconds = std::chrono::duration<double>(stop - start).count();
  r.epochs = state.epoch;
  r.converged = state.converged;
  r.a = evaluate(state, DomainTag::kA, test_a.ratings);
  r.b = evaluate(state, DomainTag::kB, test_b.ratings);
  return r;
}

CrossvalResult crossval(const DomainDataset& a, const DomainDataset& b, const OverlapRegistry& registry,
                        const TrainConfig& cfg, std::size_t folds, std::size_t jobs) {
  const auto folds_a = kfold_split(a, folds, derive_seed(cfg.seed, kFoldStream));
  const auto folds_b = kfold_split(b, folds, derive_seed(cfg.seed, kFoldStream + 1));
  CrossvalResult out;
  out.folds.resize(folds);
  run_parallel(folds, jobs, [&](std::size_t f) {
    out.folds[f] = train_and_evaluate(folds_a[f].train, folds_b[f].train, registry, folds_a[f].test,
                                      folds_b[f].test, cfg);
  });
  std::vector<MetricsReport> ra;
  std::vector<MetricsReport> rb;
  for (const auto& f : out.folds) {
    ra.push_back(f.a);
    rb.push_back(f.b);
  }
  out.mean_a = combine(ra, false);
  out.mean_b = combine(rb, false);
  out.std_a = combine(ra, true);
  out.std_b = combine(rb, true);
  return out;
}

RunResult holdout_run(const DomainDataset& a, const DomainDataset& b, const OverlapRegistry& registry,
                      const TrainConfig& cfg) {
  const Split s = holdout(a, b, cfg.seed);
  return train_and_evaluate(s.train_a, s.train_b, registry, s.test_a, s.test_b, cfg);
}

std::vector<double> AblationCurve::xs() const {
  std::vector<double> out;
  for (const auto& p : points) {
    if (std::find(out.begin(), out.end(), p.x) == out.end()) out.push_back(p.x);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> AblationCurve::values(double x, const std::string& domain,
                                          const std::string& metric) const {
  std::vector<double> out;
  for (const auto& p : points) {
    if (p.x != x) continue;
    if (domain == "mean") {
      out.push_back(0.5 * (p.result.a.metric(metric) + p.result.b.metric(metric)));
    } else {
      out.push_back(pick(p.result, domain).metric(metric));
    }
  }
  return out;
}

double AblationCurve::mean_metric(double x, const std::string& domain, const std::string& metric) const {
  const auto v = values(x, domain, metric);
  if (v.empty()) throw ValidationError("curve has no point at x = " + csv::format_double(x));
  double s = 0.0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}

double AblationCurve::mean_seconds(double x) const {
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& p : points) {
    if (p.x == x) {
      s += p.result.seconds;
      ++n;
    }
  }
  if (n == 0) throw ValidationError("curve has no point at x = " + csv::format_double(x));
  return s / static_cast<double>(n);
}

AblationCurve ablate_overlap(const DomainDataset& a, const DomainDataset& b,
                             const OverlapRegistry& registry, const std::vector<std::size_t>& counts,
                             SubsampleMode mode, const std::vector<std::uint64_t>& seeds,
                             const TrainConfig& cfg, std::size_t jobs) {
  for (std::size_t n : counts) {
    if (n > registry.size()) {
      throw ValidationError("overlap count " + std::to_string(n) + " exceeds the " +
                            std::to_string(registry.size()) + " available pairs");
    }
  }
  AblationCurve curve;
  curve.x_name = "overlap";
  curve.points.resize(counts.size() * seeds.size());
  run_parallel(curve.points.size(), jobs, [&](std::size_t cell) {
    const std::size_t n = counts[cell / seeds.size()];
    const std::uint64_t seed = seeds[cell % seeds.size()];
    TrainConfig c = cfg;
    c.seed = seed;
    Split s = holdout(a, b, seed);
    const SubsamplePlan plan = subsample_overlap(registry, n, mode, seed);
    apply_subsample(plan, s.train_a, s.train_b);
    apply_subsample(plan, s.test_a, s.test_b);
    curve.points[cell] = {static_cast<double>(n), seed,
                          train_and_evaluate(s.train_a, s.train_b, plan.registry, s.test_a, s.test_b, c)};
  });
  return curve;
}

AblationCurve sweep_dimension(const DomainDataset& a, const DomainDataset& b,
                              const OverlapRegistry& registry, const std::vector<std::size_t>& dims,
                              const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg,
                              std::size_t jobs) {
  AblationCurve curve;
  curve.x_name = "dim";
  curve.points.resize(dims.size() * seeds.size());
  run_parallel(curve.points.size(), jobs, [&](std::size_t cell) {
    const std::size_t dim = dims[cell / seeds.size()];
    const std::uint64_t seed = seeds[cell % seeds.size()];
    TrainConfig c = cfg;
    c.seed = seed;
    c.embedding_dim = dim;
    curve.points[cell] = {static_cast<double>(dim), seed, holdout_run(a, b, registry, c)};
  });
  return curve;
}

Preset sparse_preset() {
  Preset p;
  p.synth.ratings_per_user = 2;
  p.train.lr_rs = 1.0;
  return p;
}

SyntheticConfig scaled_synthetic(const SyntheticConfig& base, std::size_t records) {
  if (records < 1) throw ValidationError("record count must be positive");
  SyntheticConfig s = base;
  s.ratings_per_user = std::clamp<std::size_t>(records / 20, 1, base.ratings_per_user);
  s.users_per_domain = std::max<std::size_t>(1, records / s.ratings_per_user);
  s.items_per_domain = std::max(s.ratings_per_user * 2, s.users_per_domain / 4);
  s.overlap_count = std::max<std::size_t>(1, s.users_per_domain / 10);
  return s;
}

AblationCurve sweep_scalability(const std::vector<std::size_t>& sizes, const SyntheticConfig& base,
                                const std::vector<std::uint64_t>& seeds, const TrainConfig& cfg,
                                std::size_t max_records) {
  AblationCurve curve;
  curve.x_name = "records";
  for (std::size_t size : sizes) {
    if (size > max_records) continue;
    for (std::uint64_t seed : seeds) {
      SyntheticConfig sc = scaled_synthetic(base, size);
      sc.seed = seed;
      const SyntheticPair data = generate_synthetic_pair(sc);
      TrainConfig c = cfg;
      c.seed = seed;
      curve.points.push_back({static_cast<double>(size), seed, holdout_run(data.a, data.b, data.registry, c)});
    }
  }
  return curve;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("power-law fit needs two or more points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ValidationError("power-law fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw ValidationError("power-law fit needs distinct x values");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  fit.log_intercept = my - fit.exponent * mx;
  return fit;
}

std::vector<FeatureModeRow> feature_mode_comparison(const DomainDataset& a, const DomainDataset& b,
                                                    const OverlapRegistry& registry,
                                                    const std::vector<std::uint64_t>& seeds,
                                                    const TrainConfig& cfg, std::size_t jobs) {
  std::vector<FeatureModeRow> rows(seeds.size());
  run_parallel(2 * seeds.size(), jobs, [&](std::size_t cell) {
    const std::size_t i = cell / 2;
    TrainConfig c = cfg;
    c.seed = seeds[i];
    c.feature_mode = cell % 2 == 0 ? FeatureMode::kFeatures : FeatureMode::kIdsOnly;
    rows[i].seed = seeds[i];
    (cell % 2 == 0 ? rows[i].features : rows[i].ids_only) = holdout_run(a, b, registry, c);
  });
  return rows;
}

void write_metrics(const std::string& run_id, std::span<const MetricsReport> reports,
                   const std::filesystem::path& file, bool append) {
  const bool header = !append || !std::filesystem::exists(file);
  auto out = csv::open_output(file, append);
  if (header) out << "run_id,domain,metric,value\n";
  for (const auto& r : reports) {
    for (const auto& name : metric_names()) {
      out << run_id << ',' << r.domain << ',' << name << ',' << csv::format_double(r.metric(name)) << '\n';
    }
    out << run_id << ',' << r.domain << ",n_test," << r.n_test << '\n';
  }
}

void write_curve(const AblationCurve& curve, const std::filesystem::path& file) {
  auto out = csv::open_output(file);
  out << "x,seed,domain,metric,value,seconds\n";
  for (const auto& p : curve.points) {
    for (const MetricsReport* r : {&p.result.a, &p.result.b}) {
      for (const auto& name : metric_names()) {
        out << csv::format_double(p.x) << ',' << p.seed << ',' << r->domain << ',' << name << ','
            << csv::format_double(r->metric(name)) << ',' << csv::format_double(p.result.seconds) << '\n';
      }
    }
  }
}

}  // namespace dml
