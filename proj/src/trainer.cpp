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

#include "dml/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dml/csv.hpp"
#include "dml/error.hpp"
#include "dml/rng.hpp"

namespace dml {
namespace {

// Seed streams. Autoencoder seeds depend on the entity kind only, so the two
// domains' encoders start from the same initialisation.
constexpr std::uint64_t kUserAutoencoderStream = 0x7573;
constexpr std::uint64_t kItemAutoencoderStream = 0x6974;

std::vector<Vector> features_in_order(const std::vector<std::string>& ids, const FeatureMap& features,
                                      const char* kind) {
  std::vector<Vector> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = features.find(id);
    if (it == features.end()) {
      throw ValidationError(std::string("feature mode needs a ") + kind + " feature row for '" + id +
                            "'");
    }
    out.push_back(it->second);
  }
  return out;
}

DomainState build_domain(const DomainDataset& ds, const TrainConfig& cfg, std::uint64_t domain_tag) {
  DomainState state;
  state.index = DomainIndex(ds);
  auto [kept, held] = holdout_split(ds, cfg.validation_fraction, derive_seed(cfg.seed, 0x7600 + domain_tag));
  state.train = state.index.index(kept.ratings);
  state.validation = state.index.index(held.ratings);
  if (state.train.empty()) throw ValidationError("domain " + ds.name + " has no training ratings");

  if (cfg.feature_mode == FeatureMode::kFeatures) {
    if (!ds.has_user_features() || !ds.has_item_features()) {
      throw ValidationError("domain " + ds.name + " lacks user or item features; use ids_only mode");
    }
    AutoencoderConfig ae;
    ae.latent_dim = cfg.embedding_dim;
    ae.hidden = cfg.hidden;
    ae.epochs = cfg.autoencoder_epochs;
    ae.learning_rate = cfg.autoencoder_lr;
    ae.batch_size = cfg.batch_size;

    ae.seed = derive_seed(cfg.seed, kUserAutoencoderStream);
    const auto user_features = features_in_order(state.index.users(), ds.user_features, "user");
    AutoencoderFit user_fit = train_autoencoder(user_features, ae);
    state.users = encode_all(user_fit.model, state.index.users(), ds.user_features);
    state.user_autoencoder_loss = std::move(user_fit.loss_history);

    ae.seed = derive_seed(cfg.seed, kItemAutoencoderStream);
    const auto item_features = features_in_order(state.index.items(), ds.item_features, "item");
    AutoencoderFit item_fit = train_autoencoder(item_features, ae);
    state.items = encode_all(item_fit.model, state.index.items(), ds.item_features);
    state.item_autoencoder_loss = std::move(item_fit.loss_history);
  } else {
    state.users = embed_ids_only(state.index.user_count(), cfg.embedding_dim,
                                 derive_seed(cfg.seed, 0x1d00 + 2 * domain_tag));
    state.items = embed_ids_only(state.index.item_count(), cfg.embedding_dim,
                                 derive_seed(cfg.seed, 0x1d01 + 2 * domain_tag));
  }
  return state;
}

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

std::size_t batch_count(std::size_t n, std::size_t batch) { return (n + batch - 1) / batch; }

std::vector<RatingExample> gather(const DomainState& d, const std::vector<std::size_t>& order,
                                  std::size_t batch_index, std::size_t batch_size) {
  const std::size_t start = batch_index * batch_size;
  const std::size_t end = std::min(order.size(), start + batch_size);
  std::vector<RatingExample> out;
  out.reserve(end - start);
  for (std::size_t i = start; i < end; ++i) {
    const IndexedRating& r = d.train[order[i]];
    out.push_back({d.users.row(r.user), d.items.row(r.item), r.rating});
  }
  return out;
}

double within_domain_step(RecommenderModel& rs, DomainState& d, const std::vector<std::size_t>& order,
                          std::size_t batch_index, const TrainConfig& cfg, std::uint64_t step_seed) {
  const auto batch = gather(d, order, batch_index, cfg.batch_size);
  if (cfg.feature_mode == FeatureMode::kFeatures) return train_step(rs, batch, cfg.lr_rs, step_seed);

  // Ids-only: the embedding rows are parameters too.
  MlpGradient grad = rs.network().make_gradient();
  Rng rng(step_seed);
  std::vector<Vector> input_grads;
  const double loss = rs.accumulate_gradient(batch, grad, &rng, &input_grads);
  rs.network().apply_gradient(grad, cfg.lr_rs);
  const std::size_t k = cfg.embedding_dim;
  const std::size_t start = batch_index * cfg.batch_size;
  for (std::size_t n = 0; n < input_grads.size(); ++n) {
    const IndexedRating& r = d.train[order[start + n]];
    const std::span<const double> g(input_grads[n]);
    d.users.step(r.user, g.subspan(0, k), cfg.lr_embedding);
    d.items.step(r.item, g.subspan(k, k), cfg.lr_embedding);
  }
  return loss;
}

double validation_rmse(const RecommenderModel& rs, const DomainState& d) {
  if (d.validation.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : d.validation) {
    const double diff = rs.predict(d.users.row(r.user), d.items.row(r.item)) - r.rating;
    total += diff * diff;
  }
  return std::sqrt(total / static_cast<double>(d.validation.size()));
}

[[noreturn]] void rethrow_in_phase(const NumericError& e, const char* phase, std::size_t batch) {
  throw NumericError(std::string(phase) + ", batch " + std::to_string(batch) + ": " + e.what());
}

}  // namespace

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::kFeatures ? "features" : "ids_only";
}

FeatureMode feature_mode_from_string(const std::string& name) {
  if (name == "features") return FeatureMode::kFeatures;
  if (name == "ids_only" || name == "ids-only") return FeatureMode::kIdsOnly;
  throw ValidationError("unknown feature mode '" + name + "'");
}

void TrainConfig::validate() const {
  if (!(convergence_eps > 0.0)) throw ValidationError("convergence_eps must be positive");
  if (max_epochs < 1) throw ValidationError("max_epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (embedding_dim < 1) throw ValidationError("embedding_dim must be at least 1");
  if (!(lr_rs > 0.0) || !(lr_map > 0.0)) throw ValidationError("learning rates must be positive");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw ValidationError("validation_fraction must be in [0, 1)");
  }
}

DualTrainerState initialize_state(const DomainDataset& a, const DomainDataset& b,
                                  const OverlapRegistry& registry, const TrainConfig& cfg) {
  cfg.validate();
  a.validate();
  b.validate();
  registry.validate(a, b);

  DualTrainerState state;
  state.a = build_domain(a, cfg, 0);
  state.b = build_domain(b, cfg, 1);
  RecommenderConfig rc;
  rc.embedding_dim = cfg.embedding_dim;
  rc.hidden = cfg.hidden;
  rc.dropout_rate = cfg.dropout_rate;
  rc.seed = derive_seed(cfg.seed, 0x5a);
  state.rs_a = RecommenderModel(rc);
  rc.seed = derive_seed(cfg.seed, 0x5b);
  state.rs_b = RecommenderModel(rc);
  state.mapping = OrthogonalMap::identity(cfg.embedding_dim);
  for (const auto& p : registry.pairs) {
    state.overlap.emplace_back(state.a.index.user(p.a), state.b.index.user(p.b));
  }
  return state;
}

DualTrainerState run_epoch(DualTrainerState state, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 0xe90c0000ULL + state.epoch));
  auto next_seed = [&] { return rng.engine()(); };
  EpochRecord rec;
  rec.epoch = state.epoch + 1;
  const std::size_t bs = cfg.batch_size;

  // Phase 1: within-domain recommender training.
  {
    const auto order_a = shuffled(state.a.train.size(), rng);
    const auto order_b = shuffled(state.b.train.size(), rng);
    const std::size_t na = batch_count(order_a.size(), bs);
    const std::size_t nb = batch_count(order_b.size(), bs);
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t t = 0; t < std::max(na, nb); ++t) {
      try {
        if (t < na) sum_a += within_domain_step(state.rs_a, state.a, order_a, t, cfg, next_seed());
        if (t < nb) sum_b += within_domain_step(state.rs_b, state.b, order_b, t, cfg, next_seed());
      } catch (const NumericError& e) {
        rethrow_in_phase(e, "within-domain phase", t);
      }
    }
    rec.loss_a = na ? sum_a / static_cast<double>(na) : 0.0;
    rec.loss_b = nb ? sum_b / static_cast<double>(nb) : 0.0;
  }

  if (cfg.cross_domain) {
    // Phase 2: mapping update on overlap pairs, re-orthonormalised per batch.
    if (!state.overlap.empty()) {
      const auto order = shuffled(state.overlap.size(), rng);
      double primal = 0.0;
      double dual = 0.0;
      std::vector<EmbeddingPair> pairs;
      for (std::size_t start = 0, t = 0; start < order.size(); start += bs, ++t) {
        pairs.clear();
        for (std::size_t i = start; i < std::min(order.size(), start + bs); ++i) {
          const auto [ua, ub] = state.overlap[order[i]];
          const auto ra = state.a.users.row(ua);
          const auto rb = state.b.users.row(ub);
          pairs.push_back({Vector(ra.begin(), ra.end()), Vector(rb.begin(), rb.end())});
        }
        try {
          MappingUpdate up = update_mapping(state.mapping, pairs, cfg.lr_map);
          primal += up.before.primal;
          dual += up.before.dual;
          state.mapping = std::move(up.map);
          state.max_orthogonality_defect =
              std::max(state.max_orthogonality_defect, orthogonality_defect(state.mapping.matrix()));
          ++state.mapping_updates;
        } catch (const NumericError& e) {
          rethrow_in_phase(e, "mapping phase", t);
        }
      }
      rec.loss_overlap_a = primal / static_cast<double>(order.size());
      rec.loss_overlap_b = dual / static_cast<double>(order.size());
    }

    // Phase 3: RS_B learns domain-A ratings through X, RS_A learns domain-B
    // ratings through X^T. X is held fixed.
    const auto order_a = shuffled(state.a.train.size(), rng);
    const auto order_b = shuffled(state.b.train.size(), rng);
    const std::size_t na = batch_count(order_a.size(), bs);
    const std::size_t nb = batch_count(order_b.size(), bs);
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t t = 0; t < std::max(na, nb); ++t) {
      try {
        if (t < na) {
          const auto batch = gather(state.a, order_a, t, bs);
          sum_a += train_cross_step(state.rs_b, state.mapping, MapDirection::kForward, batch,
                                    cfg.lr_rs, next_seed());
        }
        if (t < nb) {
          const auto batch = gather(state.b, order_b, t, bs);
          sum_b += train_cross_step(state.rs_a, state.mapping, MapDirection::kInverse, batch,
                                    cfg.lr_rs, next_seed());
        }
      } catch (const NumericError& e) {
        rethrow_in_phase(e, "cross-domain phase", t);
      }
    }
    rec.loss_cross_a = na ? sum_a / static_cast<double>(na) : 0.0;
    rec.loss_cross_b = nb ? sum_b / static_cast<double>(nb) : 0.0;
  }

  rec.val_a = validation_rmse(state.rs_a, state.a);
  rec.val_b = validation_rmse(state.rs_b, state.b);
  if (!std::isfinite(rec.total_training_loss()) || !std::isfinite(rec.val_a) ||
      !std::isfinite(rec.val_b)) {
    throw NumericError("epoch " + std::to_string(rec.epoch) + " produced a non-finite loss");
  }
  state.history.push_back(rec);
  state.epoch = rec.epoch;
  state.converged =
      cfg.cross_domain && has_converged(std::span<const EpochRecord>(state.history), cfg.convergence_eps);
  return state;
}

DualTrainerState train(const DomainDataset& a, const DomainDataset& b,
                       const OverlapRegistry& registry, const TrainConfig& cfg) {
  DualTrainerState state = initialize_state(a, b, registry, cfg);
  while (state.epoch < cfg.max_epochs && !state.converged) {
    state = run_epoch(std::move(state), cfg);
  }
  return state;
}

bool has_converged(std::span<const double> losses, double eps) {
  if (losses.size() < 2) return false;
  return std::abs(losses[losses.size() - 1] - losses[losses.size() - 2]) < eps;
}

bool has_converged(std::span<const EpochRecord> history, double eps) {
  if (history.size() < 2) return false;
  const double totals[2] = {history[history.size() - 2].total_training_loss(),
                            history.back().total_training_loss()};
  return has_converged(std::span<const double>(totals), eps);
}

double predict_final(const DualTrainerState& state, DomainTag domain, const std::string& user_id,
                     const std::string& item_id) {
  const DomainState& d = state.domain(domain);
  const auto u = d.index.user(user_id);
  const auto i = d.index.item(item_id);
  return state.recommender(domain).predict(d.users.row(u), d.items.row(i));
}

void write_history(std::span<const EpochRecord> history, const std::filesystem::path& file) {
  auto out = csv::open_output(file);
  out << "epoch,L_A,L_B,L_oA,L_oB,L_Astar,L_Bstar,val_A,val_B\n";
  for (const auto& r : history) {
    out << r.epoch;
    for (double v : {r.loss_a, r.loss_b, r.loss_overlap_a, r.loss_overlap_b, r.loss_cross_a,
                     r.loss_cross_b, r.val_a, r.val_b}) {
      out << ',' << csv::format_double(v);
    }
    out << '\n';
  }
}

}  // namespace dml
