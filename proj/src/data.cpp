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

#include "dml/data.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "dml/error.hpp"
#include "dml/rng.hpp"

namespace dml {
namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void check_feature_dims(const FeatureMap& features, const char* kind) {
  std::size_t dim = 0;
  for (const auto& [id, v] : features) {
    if (dim == 0) dim = v.size();
    if (v.size() != dim || v.empty()) {
      throw ValidationError(std::string(kind) + " feature vector of '" + id + "' has dimension " +
                            std::to_string(v.size()) + ", expected " + std::to_string(dim));
    }
    for (double x : v) {
      if (!std::isfinite(x)) throw ValidationError(std::string(kind) + " feature of '" + id +
                                                   "' is not finite");
    }
  }
}

}  // namespace

std::vector<std::string> DomainDataset::user_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ratings.size());
  for (const auto& r : ratings) ids.push_back(r.user_id);
  return sorted_unique(std::move(ids));
}

std::vector<std::string> DomainDataset::item_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ratings.size());
  for (const auto& r : ratings) ids.push_back(r.item_id);
  return sorted_unique(std::move(ids));
}

void DomainDataset::validate() const {
  check_feature_dims(user_features, "user");
  check_feature_dims(item_features, "item");
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : ratings) {
    if (!std::isfinite(r.rating)) throw ValidationError("rating of (" + r.user_id + ", " +
                                                        r.item_id + ") is not finite");
    if (has_user_features() && user_features.count(r.user_id) == 0) {
      throw ValidationError("rating references user '" + r.user_id + "' with no feature row");
    }
    if (has_item_features() && item_features.count(r.item_id) == 0) {
      throw ValidationError("rating references item '" + r.item_id + "' with no feature row");
    }
    if (!seen.emplace(r.user_id, r.item_id).second) {
      throw ValidationError("duplicate rating for (" + r.user_id + ", " + r.item_id + ")");
    }
  }
}

std::vector<RatingRecord> deduplicate_ratings(const std::vector<RatingRecord>& ratings) {
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  std::vector<RatingRecord> out;
  for (const auto& r : ratings) {
    auto [it, inserted] = slot.emplace(std::make_pair(r.user_id, r.item_id), out.size());
    if (inserted) {
      out.push_back(r);
    } else if (r.timestamp >= out[it->second].timestamp) {
      out[it->second] = r;
    }
  }
  return out;
}

DomainDataset normalize_ratings(const DomainDataset& ds) {
  const double lo = ds.scale.min;
  const double hi = ds.scale.max;
  if (!(lo < hi)) {
    throw ValidationError("rating scale [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] is empty");
  }
  DomainDataset out = ds;
  for (auto& r : out.ratings) {
    if (r.rating < lo || r.rating > hi) {
      throw ValidationError("rating " + std::to_string(r.rating) + " of (" + r.user_id + ", " +
                            r.item_id + ") outside declared scale");
    }
    r.rating = (r.rating - lo) / (hi - lo);
  }
  out.scale = {0.0, 1.0};
  return out;
}

void OverlapRegistry::validate(const DomainDataset& a, const DomainDataset& b) const {
  const auto ua = a.user_ids();
  const auto ub = b.user_ids();
  std::set<std::string> seen_a;
  std::set<std::string> seen_b;
  for (const auto& p : pairs) {
    if (!seen_a.insert(p.a).second || !seen_b.insert(p.b).second) {
      throw ValidationError("overlap pair (" + p.a + ", " + p.b + ") is not unique");
    }
    if (!std::binary_search(ua.begin(), ua.end(), p.a)) {
      throw ValidationError("overlap user '" + p.a + "' not in domain " + a.name);
    }
    if (!std::binary_search(ub.begin(), ub.end(), p.b)) {
      throw ValidationError("overlap user '" + p.b + "' not in domain " + b.name);
    }
  }
}

OverlapRegistry find_overlap(const DomainDataset& a, const DomainDataset& b) {
  const auto ua = a.user_ids();
  const auto ub = b.user_ids();
  std::vector<std::string> common;
  std::set_intersection(ua.begin(), ua.end(), ub.begin(), ub.end(), std::back_inserter(common));
  OverlapRegistry reg;
  reg.pairs.reserve(common.size());
  for (auto& id : common) reg.pairs.push_back({id, id});
  return reg;
}

std::vector<Fold> kfold_split(const DomainDataset& ds, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("kfold_split: k must be at least 2");
  const std::size_t n = ds.ratings.size();
  if (n < k) {
    throw ValidationError("kfold_split: " + std::to_string(n) + " ratings cannot fill " +
                          std::to_string(k) + " folds");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x6b666f6c64ULL));
  rng.shuffle(order);

  // Fold f owns positions [start_f, start_f + size_f) of the shuffled order;
  // the first n % k folds get one extra record.
  std::vector<std::size_t> fold_of(n);
  const std::size_t base = n / k;
  const std::size_t extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t i = 0; i < size; ++i) fold_of[order[pos++]] = f;
  }

  std::vector<Fold> folds(k);
  for (auto& fold : folds) {
    for (DomainDataset* part : {&fold.train, &fold.test}) {
      part->name = ds.name;
      part->scale = ds.scale;
      part->user_features = ds.user_features;
      part->item_features = ds.item_features;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < k; ++f) {
      (f == fold_of[i] ? folds[f].test : folds[f].train).ratings.push_back(ds.ratings[i]);
    }
  }
  return folds;
}

std::pair<DomainDataset, DomainDataset> holdout_split(const DomainDataset& ds, double fraction,
                                                      std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw ValidationError("holdout fraction must be in [0, 1)");
  }
  const std::size_t n = ds.ratings.size();
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x686f6c64ULL));
  rng.shuffle(order);
  std::vector<bool> is_held(n, false);
  for (std::size_t i = 0; i < held; ++i) is_held[order[i]] = true;

  DomainDataset kept = ds;
  DomainDataset out = ds;
  kept.ratings.clear();
  out.ratings.clear();
  for (std::size_t i = 0; i < n; ++i) {
    (is_held[i] ? out : kept).ratings.push_back(ds.ratings[i]);
  }
  return {std::move(kept), std::move(out)};
}

std::string to_string(SubsampleMode mode) {
  return mode == SubsampleMode::kUnlink ? "unlink" : "discard";
}

SubsampleMode subsample_mode_from_string(const std::string& name) {
  if (name == "unlink") return SubsampleMode::kUnlink;
  if (name == "discard") return SubsampleMode::kDiscard;
  throw ValidationError("unknown subsample mode '" + name + "'");
}

SubsamplePlan subsample_overlap(const OverlapRegistry& reg, std::size_t n, SubsampleMode mode,
                                std::uint64_t seed) {
  if (n > reg.size()) {
    throw ValidationError("cannot keep " + std::to_string(n) + " of " +
                          std::to_string(reg.size()) + " overlap pairs");
  }
  std::vector<std::size_t> order(reg.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0x7375627361ULL));
  rng.shuffle(order);
  std::vector<bool> keep(reg.size(), false);
  for (std::size_t i = 0; i < n; ++i) keep[order[i]] = true;

  SubsamplePlan plan;
  plan.mode = mode;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    (keep[i] ? plan.registry.pairs : plan.unselected).push_back(reg.pairs[i]);
  }
  return plan;
}

void apply_subsample(const SubsamplePlan& plan, DomainDataset& a, DomainDataset& b) {
  if (plan.mode == SubsampleMode::kUnlink || plan.unselected.empty()) return;
  std::set<std::string> drop_a;
  std::set<std::string> drop_b;
  for (const auto& p : plan.unselected) {
    drop_a.insert(p.a);
    drop_b.insert(p.b);
  }
  auto erase_users = [](DomainDataset& ds, const std::set<std::string>& drop) {
    std::erase_if(ds.ratings, [&](const RatingRecord& r) { return drop.count(r.user_id) != 0; });
    for (const auto& id : drop) ds.user_features.erase(id);
  };
  erase_users(a, drop_a);
  erase_users(b, drop_b);
}

void SyntheticConfig::validate() const {
  if (latent_dim < 1) throw ValidationError("latent_dim must be at least 1");
  if (overlap_count > users_per_domain) {
    throw ValidationError("overlap_count exceeds users_per_domain");
  }
  if (users_per_domain == 0 || items_per_domain == 0) {
    throw ValidationError("synthetic domains need users and items");
  }
  if (ratings_per_user == 0 || ratings_per_user > items_per_domain) {
    throw ValidationError("ratings_per_user must be in [1, items_per_domain]");
  }
  if (noise_std < 0.0 || feature_noise_std < 0.0) throw ValidationError("negative noise");
  if (user_feature_dim < latent_dim || item_feature_dim < latent_dim) {
    throw ValidationError("feature dimensions must be at least latent_dim");
  }
}

Matrix random_rotation(std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  while (true) {
    Matrix g(k, k);
    for (double& v : g.values()) v = rng.normal();
    Matrix q;
    try {
      q = gram_schmidt_orthonormalize(g);
    } catch (const DegenerateInputError&) {
      continue;
    }
    // det(Q) by partial-pivot elimination; flip the last row if negative.
    Matrix lu = q;
    double det = 1.0;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < k; ++r)
        if (std::abs(lu(r, c)) > std::abs(lu(piv, c))) piv = r;
      if (piv != c) {
        for (std::size_t j = 0; j < k; ++j) std::swap(lu(c, j), lu(piv, j));
        det = -det;
      }
      det *= lu(c, c);
      for (std::size_t r = c + 1; r < k; ++r) {
        const double f = lu(r, c) / lu(c, c);
        for (std::size_t j = c; j < k; ++j) lu(r, j) -= f * lu(c, j);
      }
    }
    if (det < 0.0) {
      for (double& v : q.row(k - 1)) v = -v;
    }
    return q;
  }
}

namespace {

std::string padded_id(char prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 7) digits.insert(0, 7 - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

Vector unit_ball_normal(Rng& rng, std::size_t d) {
  Vector v(d);
  for (double& x : v) x = rng.normal();
  const double len = norm(v);
  if (len > 1.0) {
    for (double& x : v) x /= len;
  }
  return v;
}

Vector features_of(const Matrix& map, const Vector& latent, double noise, Rng& rng) {
  Vector f = matvec(map, latent);
  if (noise > 0.0) {
    for (double& x : f) x += rng.normal(0.0, noise);
  }
  return f;
}

}  // namespace

SyntheticPair generate_synthetic_pair(const SyntheticConfig& cfg) {
  cfg.validate();
  const std::size_t d = cfg.latent_dim;
  SyntheticPair out;
  out.planted_map = random_rotation(d, derive_seed(cfg.seed, 1));

  Rng feature_rng(derive_seed(cfg.seed, 2));
  Matrix user_map(cfg.user_feature_dim, d);
  Matrix item_map(cfg.item_feature_dim, d);
  for (double& v : user_map.values()) v = feature_rng.normal();
  for (double& v : item_map.values()) v = feature_rng.normal();

  Rng latent_rng(derive_seed(cfg.seed, 3));
  Rng noise_rng(derive_seed(cfg.seed, 4));
  Rng pick_rng(derive_seed(cfg.seed, 5));

  out.a.name = "A";
  out.b.name = "B";
  out.a.scale = out.b.scale = {0.0, 1.0};

  // Users: the first overlap_count domain-A users also appear in B.
  std::vector<std::string> users_a(cfg.users_per_domain);
  std::vector<std::string> users_b(cfg.users_per_domain);
  for (std::size_t u = 0; u < cfg.users_per_domain; ++u) {
    users_a[u] = padded_id('u', u);
    Vector z = unit_ball_normal(latent_rng, d);
    out.user_latents_a[users_a[u]] = z;
    if (u < cfg.overlap_count) {
      users_b[u] = users_a[u];
      out.user_latents_b[users_b[u]] = matvec(out.planted_map, z);
    } else {
      users_b[u] = padded_id('v', u);
      out.user_latents_b[users_b[u]] = unit_ball_normal(latent_rng, d);
    }
  }
  std::vector<std::string> items_a(cfg.items_per_domain);
  std::vector<std::string> items_b(cfg.items_per_domain);
  FeatureMap item_attr_b;
  for (std::size_t i = 0; i < cfg.items_per_domain; ++i) {
    items_a[i] = padded_id('a', i);
    items_b[i] = padded_id('b', i);
    out.item_latents_a[items_a[i]] = unit_ball_normal(latent_rng, d);
    Vector w = unit_ball_normal(latent_rng, d);
    out.item_latents_b[items_b[i]] = matvec(out.planted_map, w);
    item_attr_b[items_b[i]] = std::move(w);
  }

  for (std::size_t u = 0; u < cfg.users_per_domain; ++u) {
    out.a.user_features[users_a[u]] =
        features_of(user_map, out.user_latents_a[users_a[u]], cfg.feature_noise_std, feature_rng);
    out.b.user_features[users_b[u]] =
        features_of(user_map, out.user_latents_b[users_b[u]], cfg.feature_noise_std, feature_rng);
  }
  for (std::size_t i = 0; i < cfg.items_per_domain; ++i) {
    out.a.item_features[items_a[i]] =
        features_of(item_map, out.item_latents_a[items_a[i]], cfg.feature_noise_std, feature_rng);
    out.b.item_features[items_b[i]] =
        features_of(item_map, item_attr_b[items_b[i]], cfg.feature_noise_std, feature_rng);
  }

  std::int64_t clock = 0;
  std::vector<std::size_t> catalog(cfg.items_per_domain);
  auto rate = [&](DomainDataset& ds, const std::vector<std::string>& users,
                  const std::vector<std::string>& items, const FeatureMap& ulat,
                  const FeatureMap& ilat) {
    ds.ratings.reserve(users.size() * cfg.ratings_per_user);
    for (const auto& user : users) {
      std::iota(catalog.begin(), catalog.end(), 0);
      // Partial Fisher-Yates for a uniform subset.
      for (std::size_t j = 0; j < cfg.ratings_per_user; ++j) {
        const std::size_t pick = j + pick_rng.index(catalog.size() - j);
        std::swap(catalog[j], catalog[pick]);
        const std::string& item = items[catalog[j]];
        double r = 0.5 + 0.5 * dot(ulat.at(user), ilat.at(item));
        if (cfg.noise_std > 0.0) r += noise_rng.normal(0.0, cfg.noise_std);
        r = std::clamp(r, 0.0, 1.0);
        ds.ratings.push_back({user, item, r, ++clock});
      }
    }
  };
  rate(out.a, users_a, items_a, out.user_latents_a, out.item_latents_a);
  rate(out.b, users_b, items_b, out.user_latents_b, out.item_latents_b);

  out.registry = find_overlap(out.a, out.b);
  return out;
}

DomainIndex::DomainIndex(const DomainDataset& ds) {
  std::vector<std::string> users;
  std::vector<std::string> items;
  for (const auto& r : ds.ratings) {
    users.push_back(r.user_id);
    items.push_back(r.item_id);
  }
  for (const auto& [id, f] : ds.user_features) users.push_back(id);
  for (const auto& [id, f] : ds.item_features) items.push_back(id);
  users_ = sorted_unique(std::move(users));
  items_ = sorted_unique(std::move(items));
  for (std::uint32_t i = 0; i < users_.size(); ++i) user_pos_.emplace(users_[i], i);
  for (std::uint32_t i = 0; i < items_.size(); ++i) item_pos_.emplace(items_[i], i);
}

std::uint32_t DomainIndex::user(const std::string& id) const {
  const auto it = user_pos_.find(id);
  if (it == user_pos_.end()) throw LookupError("unknown user '" + id + "'");
  return it->second;
}

std::uint32_t DomainIndex::item(const std::string& id) const {
  const auto it = item_pos_.find(id);
  if (it == item_pos_.end()) throw LookupError("unknown item '" + id + "'");
  return it->second;
}

std::vector<IndexedRating> DomainIndex::index(const std::vector<RatingRecord>& ratings) const {
  std::vector<IndexedRating> out;
  out.reserve(ratings.size());
  for (const auto& r : ratings) out.push_back({user(r.user_id), item(r.item_id), r.rating});
  return out;
}

}  // namespace dml
