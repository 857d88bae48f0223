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

#include <map>

#include "dml/csv.hpp"
#include "dml/data.hpp"
#include "dml/error.hpp"

namespace dml {
namespace fs = std::filesystem;
namespace {

void expect_header(const std::vector<std::string>& lines, const fs::path& file,
                   const std::string& first_column) {
  if (lines.empty()) throw ParseError(file.string(), 1, "missing header");
  const auto cols = csv::split(lines[0]);
  if (cols.empty() || cols[0] != first_column) {
    throw ParseError(file.string(), 1, "header must start with '" + first_column + "'");
  }
}

FeatureMap read_features(const fs::path& file, const std::string& id_column) {
  const auto lines = csv::read_lines(file);
  expect_header(lines, file, id_column);
  const std::size_t width = csv::split(lines[0]).size();
  if (width < 2) throw ParseError(file.string(), 1, "no feature columns");
  FeatureMap out;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto cols = csv::split(lines[n]);
    if (cols.size() != width) {
      throw ParseError(file.string(), n + 1, "expected " + std::to_string(width) + " fields, got " +
                                                 std::to_string(cols.size()));
    }
    Vector v(width - 1);
    for (std::size_t j = 1; j < width; ++j) v[j - 1] = csv::parse_double(cols[j], file.string(), n + 1);
    if (!out.emplace(cols[0], std::move(v)).second) {
      throw ParseError(file.string(), n + 1, "duplicate id '" + cols[0] + "'");
    }
  }
  return out;
}

void write_features(const FeatureMap& features, const fs::path& file, const std::string& id_column) {
  auto out = csv::open_output(file);
  const std::size_t dim = features.empty() ? 0 : features.begin()->second.size();
  out << id_column;
  for (std::size_t j = 1; j <= dim; ++j) out << ",f" << j;
  out << '\n';
  for (const auto& [id, v] : features) {
    out << id;
    for (double x : v) out << ',' << csv::format_double(x);
    out << '\n';
  }
}

}  // namespace

DomainDataset load_domain(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("domain directory " + dir.string() + " not found");
  DomainDataset ds;

  const fs::path meta_file = dir / "meta.csv";
  const auto meta_lines = csv::read_lines(meta_file);
  expect_header(meta_lines, meta_file, "key");
  std::map<std::string, std::string> meta;
  for (std::size_t n = 1; n < meta_lines.size(); ++n) {
    if (meta_lines[n].empty()) continue;
    const auto cols = csv::split(meta_lines[n]);
    if (cols.size() != 2) throw ParseError(meta_file.string(), n + 1, "expected key,value");
    meta[cols[0]] = cols[1];
  }
  for (const char* key : {"rating_min", "rating_max"}) {
    if (meta.count(key) == 0) throw ParseError(meta_file.string(), 0, std::string("missing ") + key);
  }
  ds.scale.min = csv::parse_double(meta["rating_min"], meta_file.string(), 0);
  ds.scale.max = csv::parse_double(meta["rating_max"], meta_file.string(), 0);
  ds.name = meta.count("domain_name") ? meta["domain_name"] : dir.filename().string();

  const fs::path ratings_file = dir / "ratings.csv";
  const auto lines = csv::read_lines(ratings_file);
  expect_header(lines, ratings_file, "user_id");
  std::vector<RatingRecord> ratings;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto cols = csv::split(lines[n]);
    if (cols.size() != 3 && cols.size() != 4) {
      throw ParseError(ratings_file.string(), n + 1, "expected user_id,item_id,rating,timestamp");
    }
    if (cols[0].empty() || cols[1].empty()) {
      throw ParseError(ratings_file.string(), n + 1, "empty identifier");
    }
    RatingRecord r{cols[0], cols[1], csv::parse_double(cols[2], ratings_file.string(), n + 1), 0};
    if (cols.size() == 4 && !cols[3].empty()) {
      r.timestamp = csv::parse_int(cols[3], ratings_file.string(), n + 1);
    }
    ratings.push_back(std::move(r));
  }
  ds.ratings = deduplicate_ratings(ratings);

  if (fs::exists(dir / "user_features.csv")) {
    ds.user_features = read_features(dir / "user_features.csv", "user_id");
  }
  if (fs::exists(dir / "item_features.csv")) {
    ds.item_features = read_features(dir / "item_features.csv", "item_id");
  }
  ds.validate();
  return ds;
}

void save_domain(const DomainDataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto out = csv::open_output(dir / "meta.csv");
    out << "key,value\n"
        << "rating_min," << csv::format_double(ds.scale.min) << '\n'
        << "rating_max," << csv::format_double(ds.scale.max) << '\n'
        << "domain_name," << ds.name << '\n';
  }
  {
    auto out = csv::open_output(dir / "ratings.csv");
    out << "user_id,item_id,rating,timestamp\n";
    for (const auto& r : ds.ratings) {
      out << r.user_id << ',' << r.item_id << ',' << csv::format_double(r.rating) << ','
          << r.timestamp << '\n';
    }
  }
  if (ds.has_user_features()) write_features(ds.user_features, dir / "user_features.csv", "user_id");
  if (ds.has_item_features()) write_features(ds.item_features, dir / "item_features.csv", "item_id");
}

void save_registry(const OverlapRegistry& reg, const fs::path& file) {
  auto out = csv::open_output(file);
  out << "user_id_a,user_id_b\n";
  for (const auto& p : reg.pairs) out << p.a << ',' << p.b << '\n';
}

OverlapRegistry load_registry(const fs::path& file) {
  const auto lines = csv::read_lines(file);
  expect_header(lines, file, "user_id_a");
  OverlapRegistry reg;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    if (lines[n].empty()) continue;
    const auto cols = csv::split(lines[n]);
    if (cols.size() != 2) throw ParseError(file.string(), n + 1, "expected user_id_a,user_id_b");
    reg.pairs.push_back({cols[0], cols[1]});
  }
  return reg;
}

}  // namespace dml
