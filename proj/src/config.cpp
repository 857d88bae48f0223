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

#include "dml/config.hpp"

#include <sstream>

#include "dml/csv.hpp"
#include "dml/error.hpp"

namespace dml {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::size_t as_size(const std::string& key, const std::string& v) {
  const long long n = csv::parse_int(v, "config", 0);
  if (n < 0) throw ValidationError("config key " + key + " must be non-negative");
  return static_cast<std::size_t>(n);
}

double as_double(const std::string& v) { return csv::parse_double(v, "config", 0); }

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ValidationError("config key " + key + " expects a boolean, got '" + v + "'");
}

std::vector<std::size_t> as_sizes(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& part : csv::split(v, ',')) {
    if (!trim(part).empty()) out.push_back(as_size(key, trim(part)));
  }
  return out;
}

}  // namespace

ConfigValues parse_config(const std::string& text, const std::string& source) {
  ConfigValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, n, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(source, n, "empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

ConfigValues read_config_file(const std::filesystem::path& file) {
  std::string text;
  for (const auto& line : csv::read_lines(file)) text += line + "\n";
  return parse_config(text, file.string());
}

void apply_config(const ConfigValues& values, TrainConfig& t, SyntheticConfig& s) {
  for (const auto& [key, v] : values) {
    if (key == "max_epochs" || key == "epochs") t.max_epochs = as_size(key, v);
    else if (key == "convergence_eps") t.convergence_eps = as_double(v);
    else if (key == "lr_rs") t.lr_rs = as_double(v);
    else if (key == "lr_map") t.lr_map = as_double(v);
    else if (key == "lr_embedding") t.lr_embedding = as_double(v);
    else if (key == "batch_size") t.batch_size = as_size(key, v);
    else if (key == "seed") t.seed = s.seed = as_size(key, v);
    else if (key == "feature_mode") t.feature_mode = feature_mode_from_string(v);
    else if (key == "embedding_dim" || key == "dim") t.embedding_dim = as_size(key, v);
    else if (key == "hidden") t.hidden = as_sizes(key, v);
    else if (key == "dropout_rate") t.dropout_rate = as_double(v);
    else if (key == "autoencoder_epochs") t.autoencoder_epochs = as_size(key, v);
    else if (key == "autoencoder_lr") t.autoencoder_lr = as_double(v);
    else if (key == "validation_fraction") t.validation_fraction = as_double(v);
    else if (key == "cross_domain") t.cross_domain = as_bool(key, v);
    else if (key == "users") s.users_per_domain = as_size(key, v);
    else if (key == "items") s.items_per_domain = as_size(key, v);
    else if (key == "latent_dim") s.latent_dim = as_size(key, v);
    else if (key == "overlap") s.overlap_count = as_size(key, v);
    else if (key == "ratings_per_user") s.ratings_per_user = as_size(key, v);
    else if (key == "noise") s.noise_std = as_double(v);
    else if (key == "user_feature_dim") s.user_feature_dim = as_size(key, v);
    else if (key == "item_feature_dim") s.item_feature_dim = as_size(key, v);
    else if (key == "feature_noise") s.feature_noise_std = as_double(v);
    else throw ValidationError("unknown config key '" + key + "'");
  }
}

std::string describe(const TrainConfig& c) {
  std::ostringstream out;
  out << "max_epochs=" << c.max_epochs << "\nconvergence_eps=" << csv::format_double(c.convergence_eps)
      << "\nlr_rs=" << csv::format_double(c.lr_rs) << "\nlr_map=" << csv::format_double(c.lr_map)
      << "\nlr_embedding=" << csv::format_double(c.lr_embedding) << "\nbatch_size=" << c.batch_size
      << "\nseed=" << c.seed << "\nfeature_mode=" << to_string(c.feature_mode)
      << "\nembedding_dim=" << c.embedding_dim << "\nhidden=";
  for (std::size_t i = 0; i < c.hidden.size(); ++i) out << (i ? "," : "") << c.hidden[i];
  out << "\ndropout_rate=" << csv::format_double(c.dropout_rate)
      << "\nautoencoder_epochs=" << c.autoencoder_epochs
      << "\nautoencoder_lr=" << csv::format_double(c.autoencoder_lr)
      << "\nvalidation_fraction=" << csv::format_double(c.validation_fraction)
      << "\ncross_domain=" << (c.cross_domain ? "true" : "false") << '\n';
  return out.str();
}

}  // namespace dml
