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

#ifndef DML_DATA_HPP_
#define DML_DATA_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "dml/tensor.hpp"

namespace dml {

struct RatingRecord {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingRecord&, const RatingRecord&) = default;
};

struct RatingScale {
  double min = 0.0;
  double max = 1.0;

  friend bool operator==(const RatingScale&, const RatingScale&) = default;
};

using FeatureMap = std::map<std::string, Vector>;

struct DomainDataset {
  std::string name;
  std::vector<RatingRecord> ratings;
  FeatureMap user_features;  // may be empty
  FeatureMap item_features;  // may be empty
  RatingScale scale;

  // Sorted, unique.
  std::vector<std::string> user_ids() const;
  std::vector<std::string> item_ids() const;

  bool has_user_features() const noexcept { return !user_features.empty(); }
  bool has_item_features() const noexcept { return !item_features.empty(); }

  // Checks feature dimensions, dangling references and duplicate pairs.
  void validate() const;

  friend bool operator==(const DomainDataset&, const DomainDataset&) = default;
};

// Keeps the record with the latest timestamp for each (user, item); ties keep
// the later record in input order. Output is in first-occurrence order.
std::vector<RatingRecord> deduplicate_ratings(const std::vector<RatingRecord>& ratings);

// Min-max rescale to [0, 1]; the returned dataset records scale (0, 1).
DomainDataset normalize_ratings(const DomainDataset& ds);

struct OverlapPair {
  std::string a;
  std::string b;

  friend bool operator==(const OverlapPair&, const OverlapPair&) = default;
};

struct OverlapRegistry {
  std::vector<OverlapPair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
  // Uniqueness and membership in the two datasets.
  void validate(const DomainDataset& a, const DomainDataset& b) const;

  friend bool operator==(const OverlapRegistry&, const OverlapRegistry&) = default;
};

// Users present in both domains under the same id, sorted by id.
OverlapRegistry find_overlap(const DomainDataset& a, const DomainDataset& b);

struct Fold {
  DomainDataset train;
  DomainDataset test;
};

// k folds with sizes differing by at most one; deterministic for a seed.
std::vector<Fold> kfold_split(const DomainDataset& ds, std::size_t k, std::uint64_t seed);

// Seeded split of a dataset into (kept, held-out) with round(fraction * n)
// records held out.
std::pair<DomainDataset, DomainDataset> holdout_split(const DomainDataset& ds, double fraction,
                                                      std::uint64_t seed);

enum class SubsampleMode { kUnlink, kDiscard };

std::string to_string(SubsampleMode mode);
SubsampleMode subsample_mode_from_string(const std::string& name);

struct SubsamplePlan {
  OverlapRegistry registry;            // the retained pairs
  std::vector<OverlapPair> unselected;  // pairs removed from the registry
  SubsampleMode mode = SubsampleMode::kUnlink;
};

SubsamplePlan subsample_overlap(const OverlapRegistry& reg, std::size_t n, SubsampleMode mode,
                                std::uint64_t seed);

// Applies the plan's dataset edits. `unlink` leaves the datasets untouched;
// `discard` deletes every rating (and feature row) of unselected overlap users
// in both domains.
void apply_subsample(const SubsamplePlan& plan, DomainDataset& a, DomainDataset& b);

struct SyntheticConfig {
  std::size_t users_per_domain = 2000;
  std::size_t items_per_domain = 500;
  std::size_t latent_dim = 3;
  std::size_t overlap_count = 200;
  std::size_t ratings_per_user = 50;
  double noise_std = 0.05;
  std::size_t user_feature_dim = 12;
  std::size_t item_feature_dim = 12;
  double feature_noise_std = 0.02;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticPair {
  DomainDataset a;
  DomainDataset b;
  OverlapRegistry registry;
  Matrix planted_map;  // latent_dim x latent_dim, det +1
  // Ground-truth latents in each domain's own frame.
  FeatureMap user_latents_a;
  FeatureMap user_latents_b;
  FeatureMap item_latents_a;
  FeatureMap item_latents_b;
};

// Two coupled domains. Domain-B user latents of overlap users are Q z for the
// domain-A latent z; item latents in B are Q w for an item attribute vector w
// drawn like A's items, so ratings follow 0.5 + 0.5 <user, item> in both
// domains. Features are one shared random linear map (per entity kind) of the
// user latent in its own frame, or of the item attribute vector w, plus noise.
SyntheticPair generate_synthetic_pair(const SyntheticConfig& cfg);

// Random orthogonal matrix with determinant +1 (Gram-Schmidt of a Gaussian
// matrix, last row flipped if needed).
Matrix random_rotation(std::size_t k, std::uint64_t seed);

// On-disk layout of one domain: ratings.csv, meta.csv and optional
// user_features.csv / item_features.csv.
DomainDataset load_domain(const std::filesystem::path& dir);
void save_domain(const DomainDataset& ds, const std::filesystem::path& dir);

void save_registry(const OverlapRegistry& reg, const std::filesystem::path& file);
OverlapRegistry load_registry(const std::filesystem::path& file);

// Dense integer view of a dataset used by the trainers.
struct IndexedRating {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  double rating = 0.0;
};

class DomainIndex {
 public:
  DomainIndex() = default;
  // Users and items are taken from ratings and feature maps of `ds`.
  explicit DomainIndex(const DomainDataset& ds);

  std::size_t user_count() const noexcept { return users_.size(); }
  std::size_t item_count() const noexcept { return items_.size(); }
  const std::vector<std::string>& users() const noexcept { return users_; }
  const std::vector<std::string>& items() const noexcept { return items_; }

  // Throws LookupError for unknown ids.
  std::uint32_t user(const std::string& id) const;
  std::uint32_t item(const std::string& id) const;
  bool has_user(const std::string& id) const { return user_pos_.count(id) != 0; }
  bool has_item(const std::string& id) const { return item_pos_.count(id) != 0; }

  // Throws LookupError if a rating references an id outside the index.
  std::vector<IndexedRating> index(const std::vector<RatingRecord>& ratings) const;

 private:
  std::vector<std::string> users_;
  std::vector<std::string> items_;
  std::unordered_map<std::string, std::uint32_t> user_pos_;
  std::unordered_map<std::string, std::uint32_t> item_pos_;
};

}  // namespace dml

#endif  // DML_DATA_HPP_
