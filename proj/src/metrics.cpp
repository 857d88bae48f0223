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
#include <cmath>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "dml/error.hpp"
#include "dml/eval.hpp"

namespace dml {
namespace {

void check_lengths(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw ValidationError("prediction and truth lengths differ (" + std::to_string(pred.size()) +
                          " vs " + std::to_string(truth.size()) + ")");
  }
  if (pred.empty()) throw ValidationError("no predictions to score");
}

}  // namespace

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_lengths(pred, truth);
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
  return s / static_cast<double>(pred.size());
}

std::vector<std::string> top_k(const UserRanking& user, std::size_t k) {
  std::vector<const ScoredItem*> order;
  order.reserve(user.items.size());
  for (const auto& it : user.items) order.push_back(&it);
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [](const ScoredItem* x, const ScoredItem* y) {
                      if (x->predicted != y->predicted) return x->predicted > y->predicted;
                      return x->item_id < y->item_id;
                    });
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(order[i]->item_id);
  return out;
}

PrecisionRecall precision_recall_at_k(std::span<const UserRanking> users, std::size_t k) {
  if (k < 1) throw ValidationError("k must be at least 1");
  double p_sum = 0.0;
  double r_sum = 0.0;
  std::size_t p_users = 0;
  std::size_t r_users = 0;
  for (const auto& u : users) {
    if (u.items.empty()) continue;
    const std::set<std::string> relevant(u.relevant.begin(), u.relevant.end());
    std::size_t hits = 0;
    for (const auto& id : top_k(u, k)) hits += relevant.count(id);
    p_sum += static_cast<double>(hits) / static_cast<double>(k);
    ++p_users;
    if (!relevant.empty()) {
      r_sum += static_cast<double>(hits) / static_cast<double>(relevant.size());
      ++r_users;
    }
  }
  PrecisionRecall out;
  if (p_users) out.precision = p_sum / static_cast<double>(p_users);
  if (r_users) out.recall = r_sum / static_cast<double>(r_users);
  return out;
}

double improvement_pct(double ours, double baseline, Direction direction) {
  if (baseline == 0.0) throw ValidationError("improvement over a zero baseline is undefined");
  const double diff = direction == Direction::kLowerBetter ? baseline - ours : ours - baseline;
  return 100.0 * diff / baseline;
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("paired samples differ in length");
  if (a.size() < 2) throw ValidationError("paired t-test needs at least two pairs");
  const auto n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double var = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) var += (a[i] - b[i] - mean) * (a[i] - b[i] - mean);
  var /= n - 1.0;

  TTestResult r;
  r.df = a.size() - 1;
  r.mean_difference = mean;
  if (var == 0.0) {
    r.t = mean == 0.0 ? 0.0 : std::copysign(INFINITY, mean);
    r.p_value = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / std::sqrt(var / n);
  const boost::math::students_t dist(static_cast<double>(r.df));
  r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"rmse", "mae", "precision_at_k", "recall_at_k"};
  return names;
}

double MetricsReport::metric(const std::string& name) const {
  if (name == "rmse") return rmse;
  if (name == "mae") return mae;
  if (name == "precision_at_k") return precision_at_k;
  if (name == "recall_at_k") return recall_at_k;
  if (name == "n_test") return static_cast<double>(n_test);
  throw ValidationError("unknown metric '" + name + "'");
}

void MetricsReport::validate() const {
  if (n_test < 1) throw ValidationError("report for " + domain + " has no test ratings");
  if (!(mae >= 0.0) || !(rmse >= mae - 1e-12)) {
    throw ValidationError("report for " + domain + " breaks RMSE >= MAE >= 0");
  }
  for (double v : {precision_at_k, recall_at_k}) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("report for " + domain + " has P/R outside [0, 1]");
  }
}

MetricsReport evaluate_predictions(const std::string& domain, const std::vector<RatingRecord>& test,
                                   const Predictor& predict, std::size_t k) {
  std::vector<double> pred;
  std::vector<double> truth;
  std::map<std::string, UserRanking> by_user;
  for (const auto& r : test) {
    const auto p = predict(r.user_id, r.item_id);
    if (!p) continue;
    pred.push_back(*p);
    truth.push_back(r.rating);
    UserRanking& u = by_user[r.user_id];
    u.items.push_back({r.item_id, *p});
    if (r.rating >= kRelevanceThreshold) u.relevant.push_back(r.item_id);
  }
  if (pred.empty()) throw ValidationError("no test rating of domain " + domain + " can be scored");

  std::vector<UserRanking> users;
  users.reserve(by_user.size());
  for (auto& [id, u] : by_user) users.push_back(std::move(u));
  const PrecisionRecall pr = precision_recall_at_k(users, k);

  MetricsReport rep;
  rep.domain = domain;
  rep.rmse = rmse(pred, truth);
  rep.mae = mae(pred, truth);
  rep.precision_at_k = pr.precision;
  rep.recall_at_k = pr.recall;
  rep.k = k;
  rep.n_test = pred.size();
  rep.validate();
  return rep;
}

MetricsReport evaluate(const DualTrainerState& state, DomainTag tag,
                       const std::vector<RatingRecord>& test, std::size_t k) {
  const DomainState& d = state.domain(tag);
  const RecommenderModel& rs = state.recommender(tag);
  return evaluate_predictions(
      tag == DomainTag::kA ? "A" : "B", test,
      [&](const std::string& user, const std::string& item) -> std::optional<double> {
        if (!d.index.has_user(user) || !d.index.has_item(item)) return std::nullopt;
        return rs.predict(d.users.row(d.index.user(user)), d.items.row(d.index.item(item)));
      },
      k);
}

}  // namespace dml
