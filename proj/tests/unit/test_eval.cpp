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


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "dml/csv.hpp"
#include "dml/error.hpp"
#include "dml/eval.hpp"
#include "test_util.hpp"

namespace dml {
namespace {

struct Ref {
  double precision = 0.0;
  double recall = 0.0;
};

// Full sort on (-score, id), counted with plain loops.
Ref brute_force_pr(const std::vector<UserRanking>& users, std::size_t k) {
  double p = 0.0, r = 0.0;
  std::size_t np = 0, nr = 0;
  for (const auto& u : users) {
    if (u.items.empty()) continue;
    std::vector<ScoredItem> s = u.items;
    std::sort(s.begin(), s.end(), [](const ScoredItem& a, const ScoredItem& b) {
      return a.predicted > b.predicted || (a.predicted == b.predicted && a.item_id < b.item_id);
    });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < s.size() && i < k; ++i) {
      for (const auto& rel : u.relevant) {
        if (rel == s[i].item_id) {
          ++hits;
          break;
        }
      }
    }
    p += static_cast<double>(hits) / static_cast<double>(k);
    ++np;
    if (!u.relevant.empty()) {
      r += static_cast<double>(hits) / static_cast<double>(u.relevant.size());
      ++nr;
    }
  }
  return {np ? p / np : 0.0, nr ? r / nr : 0.0};
}

UserRanking random_user(Rng& rng) {
  UserRanking u;
  const std::size_t n = rng.index(12);
  for (std::size_t i = 0; i < n; ++i) {
    // Coarse scores so ties occur.
    const double score = std::floor(rng.uniform() * 6.0) / 6.0;
    u.items.push_back({"i" + std::to_string(i), score});
    if (rng.uniform() < 0.4) u.relevant.push_back(u.items.back().item_id);
  }
  return u;
}

TEST(Rmse, Examples) {
  const std::vector<double> pred{0, 1}, truth{1, 1};
  EXPECT_DOUBLE_EQ(rmse(pred, truth), std::sqrt(0.5));
  EXPECT_DOUBLE_EQ(mae(pred, truth), 0.5);
  EXPECT_EQ(rmse(truth, truth), 0.0);
}

TEST(Rmse, RejectsBadInput) {
  const std::vector<double> a{1, 2}, b{1};
  EXPECT_THROW(rmse(a, b), ValidationError);
  EXPECT_THROW(mae(std::vector<double>{}, std::vector<double>{}), ValidationError);
}

TEST(Rmse, BruteForceOracle) {
  Rng rng(61);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(50);
    std::vector<double> p(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = rng.uniform();
      y[i] = rng.uniform();
    }
    long double sq = 0, ab = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long double d = static_cast<long double>(p[i]) - y[i];
      sq += d * d;
      ab += d < 0 ? -d : d;
    }
    const double r = rmse(p, y), m = mae(p, y);
    EXPECT_NEAR(r, static_cast<double>(std::sqrt(sq / n)), 1e-12);
    EXPECT_NEAR(m, static_cast<double>(ab / n), 1e-12);
    EXPECT_GE(r, m - 1e-15);
  }
}

TEST(PrecisionRecall, Examples) {
  UserRanking all;
  UserRanking none;
  for (int i = 0; i < 5; ++i) {
    all.items.push_back({"a" + std::to_string(i), 0.1 * i});
    all.relevant.push_back(all.items.back().item_id);
    none.items.push_back({"b" + std::to_string(i), 0.1 * i});
  }
  const auto one = precision_recall_at_k(std::vector<UserRanking>{all}, 5);
  EXPECT_EQ(one.precision, 1.0);
  EXPECT_EQ(one.recall, 1.0);
  const auto zero = precision_recall_at_k(std::vector<UserRanking>{none}, 5);
  EXPECT_EQ(zero.precision, 0.0);
  EXPECT_EQ(zero.recall, 0.0);
}

TEST(PrecisionRecall, RecallIsOneWhenKCoversCatalog) {
  UserRanking u;
  for (int i = 0; i < 3; ++i) {
    u.items.push_back({"x" + std::to_string(i), 0.5});
    u.relevant.push_back(u.items.back().item_id);
  }
  EXPECT_EQ(precision_recall_at_k(std::vector<UserRanking>{u}, 10).recall, 1.0);
}

TEST(PrecisionRecall, ZeroKRejected) {
  EXPECT_THROW(precision_recall_at_k(std::vector<UserRanking>{}, 0), ValidationError);
}

TEST(PrecisionRecall, BruteForceOracle) {
  Rng rng(67);
  for (int t = 0; t < 1000; ++t) {
    std::vector<UserRanking> users;
    const std::size_t n = 1 + rng.index(30);
    for (std::size_t i = 0; i < n; ++i) users.push_back(random_user(rng));
    const std::size_t k = 1 + rng.index(8);
    const auto got = precision_recall_at_k(users, k);
    const auto ref = brute_force_pr(users, k);
    EXPECT_NEAR(got.precision, ref.precision, 1e-12);
    EXPECT_NEAR(got.recall, ref.recall, 1e-12);
    EXPECT_GE(got.precision, 0.0);
    EXPECT_LE(got.recall, 1.0);
  }
}

TEST(TopK, TiesBrokenByItemId) {
  UserRanking u;
  u.items = {{"c", 0.5}, {"a", 0.5}, {"b", 0.9}, {"d", 0.1}};
  EXPECT_EQ(top_k(u, 3), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(top_k(u, 10).size(), 4u);
}

TEST(ImprovementPct, TableCells) {
  EXPECT_NEAR(improvement_pct(0.2184, 0.2213, Direction::kLowerBetter), 1.31, 0.005);
  EXPECT_NEAR(improvement_pct(0.2162, 0.2209, Direction::kLowerBetter), 2.13, 0.005);
  EXPECT_NEAR(improvement_pct(0.8826, 0.8595, Direction::kHigherBetter), 2.69, 0.005);
  EXPECT_LT(improvement_pct(0.3, 0.2, Direction::kLowerBetter), 0.0);
  EXPECT_THROW(improvement_pct(0.1, 0.0, Direction::kLowerBetter), ValidationError);
}

TEST(PairedTTest, MatchesHandComputation) {
  const std::vector<double> a{1.0, 2.0, 3.0, 4.0}, b{0.5, 1.0, 2.5, 3.0};
  // d = {0.5, 1, 0.5, 1}: mean 0.75, sd sqrt(1/12), t = 0.75 / (sd / 2) = 3 sqrt(3).
  const auto r = paired_t_test(a, b);
  EXPECT_EQ(r.df, 3u);
  EXPECT_NEAR(r.mean_difference, 0.75, 1e-15);
  EXPECT_NEAR(r.t, 3.0 * std::sqrt(3.0), 1e-12);
  // Two-sided p for t = 5.196 on 3 df.
  EXPECT_NEAR(r.p_value, 0.013846, 1e-5);
}

TEST(PairedTTest, DegenerateCases) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(paired_t_test(a, a).p_value, 1.0);
  const std::vector<double> shifted{0, 1, 2};
  EXPECT_EQ(paired_t_test(a, shifted).p_value, 0.0);
  EXPECT_THROW(paired_t_test(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
  EXPECT_THROW(paired_t_test(a, std::vector<double>{1, 2}), ValidationError);
}

TEST(MetricsReport, ValidateAndLookup) {
  MetricsReport r{.domain = "A", .rmse = 0.2, .mae = 0.1, .precision_at_k = 0.4, .recall_at_k = 0.5, .n_test = 3};
  EXPECT_NO_THROW(r.validate());
  EXPECT_EQ(r.metric("mae"), 0.1);
  EXPECT_THROW(r.metric("auc"), ValidationError);
  r.mae = 0.3;
  EXPECT_THROW(r.validate(), ValidationError);
  r.mae = 0.1;
  r.recall_at_k = 1.5;
  EXPECT_THROW(r.validate(), ValidationError);
}

TEST(EvaluatePredictions, SkipsUnscorableAndKeepsRmseAboveMae) {
  std::vector<RatingRecord> test;
  Rng rng(71);
  for (int u = 0; u < 20; ++u) {
    for (int i = 0; i < 8; ++i) test.push_back({"u" + std::to_string(u), "i" + std::to_string(i), rng.uniform()});
  }
  std::size_t asked = 0;
  const auto rep = evaluate_predictions(
      "A", test,
      [&](const std::string& user, const std::string&) -> std::optional<double> {
        ++asked;
        if (user == "u0") return std::nullopt;
        return 0.5;
      });
  EXPECT_EQ(asked, test.size());
  EXPECT_EQ(rep.n_test, test.size() - 8);
  EXPECT_GE(rep.rmse, rep.mae);
  EXPECT_THROW(evaluate_predictions("B", test, [](const std::string&, const std::string&) {
                 return std::optional<double>{};
               }),
               ValidationError);
}

TEST(FitPowerLaw, RecoversExponent) {
  const std::vector<double> x{1e2, 1e3, 1e4, 1e5};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, 1.1));
  const auto fit = fit_power_law(x, y);
  EXPECT_NEAR(fit.exponent, 1.1, 1e-12);
  EXPECT_NEAR(fit.log_intercept, std::log(3.0), 1e-10);
}

TEST(ScaledSynthetic, RecordCountsMatch) {
  for (std::size_t n : {100u, 1000u, 10000u}) {
    const auto cfg = scaled_synthetic(SyntheticConfig{}, n);
    EXPECT_EQ(cfg.users_per_domain * cfg.ratings_per_user, n);
    EXPECT_LE(cfg.overlap_count, cfg.users_per_domain);
  }
}

TEST(WriteMetrics, LongFormat) {
  const MetricsReport r{.domain = "B", .rmse = 0.2, .mae = 0.1, .n_test = 7};
  const auto file = std::filesystem::temp_directory_path() / "dml_test_metrics.csv";
  write_metrics("run1", std::span(&r, 1), file);
  write_metrics("run2", std::span(&r, 1), file, true);
  const auto lines = csv::read_lines(file);
  EXPECT_EQ(lines.front(), "run_id,domain,metric,value");
  EXPECT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[1], "run1,B,rmse,0.2");
  std::filesystem::remove(file);
}

TEST(RunParallel, VisitsEveryIndexOnce) {
  std::vector<int> hits(37, 0);
  run_parallel(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
}

}  // namespace
}  // namespace dml
