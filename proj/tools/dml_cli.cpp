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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dml/config.hpp"
#include "dml/csv.hpp"
#include "dml/data.hpp"
#include "dml/error.hpp"
#include "dml/eval.hpp"
#include "dml/mapping.hpp"
#include "dml/nmf.hpp"
#include "dml/recsys.hpp"
#include "dml/rng.hpp"
#include "dml/trainer.hpp"

namespace fs = std::filesystem;
using namespace dml;

namespace {

struct Options {
  std::string domain_a;
  std::string domain_b;
  std::string registry;
  std::string model;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::string config;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> dim;
  double alpha = 0.3;
  std::size_t jobs = 1;
  std::size_t max_records = 100000;
  std::size_t seeds = 5;
  std::vector<std::size_t> counts = {0, 8, 200};
  std::vector<std::size_t> dims = {4, 8, 16, 32, 64, 128, 256};
  std::vector<std::size_t> sizes = {100, 1000, 10000, 100000, 1000000};
  std::string mode = "unlink";
  std::size_t rank = 3;
  std::size_t iterations = 500;
  std::size_t rows = 12;
  std::size_t cols = 10;
};

struct Configs {
  TrainConfig train;
  SyntheticConfig synth;
};

Configs resolve(const Options& o, bool needs_seed) {
  Configs c;
  if (!o.config.empty()) apply_config(read_config_file(o.config), c.train, c.synth);
  if (needs_seed && !o.seed) throw ValidationError("missing-seed", "--seed is required for this command");
  if (o.seed) c.train.seed = c.synth.seed = *o.seed;
  if (o.epochs) c.train.max_epochs = *o.epochs;
  if (o.dim) c.train.embedding_dim = *o.dim;
  c.train.validate();
  return c;
}

DomainDataset load_normalized(const std::string& dir) {
  if (dir.empty()) throw IoError("a domain directory is required");
  return normalize_ratings(load_domain(dir));
}

OverlapRegistry registry_for(const Options& o, const DomainDataset& a, const DomainDataset& b) {
  if (!o.registry.empty()) return load_registry(o.registry);
  const fs::path beside = fs::path(o.domain_a).parent_path() / "registry.csv";
  if (fs::exists(beside)) return load_registry(beside);
  return find_overlap(a, b);
}

std::vector<std::uint64_t> seed_list(const Configs& c, std::size_t n) {
  std::vector<std::uint64_t> out(n);
  std::iota(out.begin(), out.end(), c.train.seed);
  return out;
}

void write_text(const fs::path& file, const std::string& text) {
  auto out = csv::open_output(file);
  out << text;
}

int cmd_synth(const Options& o) {
  Configs c = resolve(o, false);
  const SyntheticPair pair = generate_synthetic_pair(c.synth);
  const fs::path out(o.out);
  save_domain(pair.a, out / "domain_a");
  save_domain(pair.b, out / "domain_b");
  save_registry(pair.registry, out / "registry.csv");
  save_map(OrthogonalMap(pair.planted_map), out / "planted_map.txt");
  std::cout << "wrote " << pair.a.ratings.size() << " + " << pair.b.ratings.size() << " ratings, "
            << pair.registry.size() << " overlap users to " << out.string() << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  Configs c = resolve(o, true);
  const DomainDataset a = load_normalized(o.domain_a);
  const DomainDataset b = load_normalized(o.domain_b);
  const OverlapRegistry reg = registry_for(o, a, b);
  auto [train_a, test_a] = holdout_split(a, kTestFraction, derive_seed(c.train.seed, 0x7e57));
  auto [train_b, test_b] = holdout_split(b, kTestFraction, derive_seed(c.train.seed, 0x7e58));

  OverlapRegistry kept;
  const auto ua = train_a.user_ids();
  const auto ub = train_b.user_ids();
  for (const auto& p : reg.pairs) {
    if (std::binary_search(ua.begin(), ua.end(), p.a) && std::binary_search(ub.begin(), ub.end(), p.b)) {
      kept.pairs.push_back(p);
    }
  }

  DualTrainerState state = initialize_state(train_a, train_b, kept, c.train);
  while (state.epoch < c.train.max_epochs && !state.converged) {
    state = run_epoch(std::move(state), c.train);
    const EpochRecord& r = state.history.back();
    std::cout << "epoch " << r.epoch << " loss " << csv::format_double(r.total_training_loss()) << " val_A "
              << csv::format_double(r.val_a) << " val_B " << csv::format_double(r.val_b) << '\n';
  }

  const fs::path out(o.out);
  save_checkpoint(state.rs_a, out / "rs_a.ckpt");
  save_checkpoint(state.rs_b, out / "rs_b.ckpt");
  save_map(state.mapping, out / "mapping.txt");
  save_embeddings(state.a.users, state.a.index.users(), out / "users_a.csv");
  save_embeddings(state.a.items, state.a.index.items(), out / "items_a.csv");
  save_embeddings(state.b.users, state.b.index.users(), out / "users_b.csv");
  save_embeddings(state.b.items, state.b.index.items(), out / "items_b.csv");
  write_history(state.history, out / "history.csv");
  for (DomainDataset* t : {&test_a, &test_b}) {
    t->user_features.clear();
    t->item_features.clear();
  }
  save_domain(test_a, out / "test_a");
  save_domain(test_b, out / "test_b");
  write_text(out / "train_config.txt", describe(c.train));
  std::cout << (state.converged ? "converged" : "stopped") << " after " << state.epoch << " epochs\n";
  return 0;
}

struct LoadedSide {
  RecommenderModel rs;
  std::map<std::string, std::size_t> users;
  std::map<std::string, std::size_t> items;
  EmbeddingTable user_table;
  EmbeddingTable item_table;
};

LoadedSide load_side(const fs::path& dir, const char* tag) {
  const std::string t(tag);
  for (const auto& f : {"rs_" + t + ".ckpt", "users_" + t + ".csv", "items_" + t + ".csv"}) {
    if (!fs::exists(dir / f)) throw IoError("missing " + (dir / f).string());
  }
  LoadedSide s;
  s.rs = load_checkpoint(dir / ("rs_" + t + ".ckpt"));
  auto [uids, utable] = load_embeddings(dir / ("users_" + t + ".csv"));
  auto [iids, itable] = load_embeddings(dir / ("items_" + t + ".csv"));
  for (std::size_t i = 0; i < uids.size(); ++i) s.users[uids[i]] = i;
  for (std::size_t i = 0; i < iids.size(); ++i) s.items[iids[i]] = i;
  s.user_table = std::move(utable);
  s.item_table = std::move(itable);
  return s;
}

MetricsReport eval_side(const LoadedSide& s, const DomainDataset& test, const std::string& label) {
  return evaluate_predictions(label, test.ratings,
                              [&](const std::string& u, const std::string& i) -> std::optional<double> {
                                const auto pu = s.users.find(u);
                                const auto pi = s.items.find(i);
                                if (pu == s.users.end() || pi == s.items.end()) return std::nullopt;
                                return s.rs.predict(s.user_table.row(pu->second),
                                                    s.item_table.row(pi->second));
                              });
}

int cmd_eval(const Options& o) {
  const fs::path model(o.model.empty() ? o.out : o.model);
  if (!fs::exists(model)) throw IoError("model directory " + model.string() + " does not exist");
  const DomainDataset test_a = o.domain_a.empty() ? load_domain(model / "test_a") : load_normalized(o.domain_a);
  const DomainDataset test_b = o.domain_b.empty() ? load_domain(model / "test_b") : load_normalized(o.domain_b);
  const std::vector<MetricsReport> reports = {eval_side(load_side(model, "a"), test_a, "A"),
                                              eval_side(load_side(model, "b"), test_b, "B")};
  write_metrics(model.filename().string().empty() ? "run" : model.filename().string(), reports,
                fs::path(o.out) / "metrics.csv");
  for (const auto& r : reports) {
    std::cout << r.domain << " rmse " << csv::format_double(r.rmse) << " mae " << csv::format_double(r.mae)
              << " P@5 " << csv::format_double(r.precision_at_k) << " R@5 "
              << csv::format_double(r.recall_at_k) << " n " << r.n_test << '\n';
  }
  return 0;
}

void print_curve(const AblationCurve& curve) {
  for (double x : curve.xs()) {
    std::cout << curve.x_name << ' ' << csv::format_double(x) << " rmse_A "
              << csv::format_double(curve.mean_metric(x, "A", "rmse")) << " rmse_B "
              << csv::format_double(curve.mean_metric(x, "B", "rmse")) << " seconds "
              << csv::format_double(curve.mean_seconds(x)) << '\n';
  }
}

int cmd_ablate_overlap(const Options& o) {
  Configs c = resolve(o, true);
  const DomainDataset a = load_normalized(o.domain_a);
  const DomainDataset b = load_normalized(o.domain_b);
  const OverlapRegistry reg = registry_for(o, a, b);
  const AblationCurve curve = ablate_overlap(a, b, reg, o.counts, subsample_mode_from_string(o.mode),
                                             seed_list(c, o.seeds), c.train, o.jobs);
  write_curve(curve, fs::path(o.out) / "curve.csv");
  print_curve(curve);
  return 0;
}

int cmd_sweep_dim(const Options& o) {
  Configs c = resolve(o, true);
  const DomainDataset a = load_normalized(o.domain_a);
  const DomainDataset b = load_normalized(o.domain_b);
  const AblationCurve curve =
      sweep_dimension(a, b, registry_for(o, a, b), o.dims, seed_list(c, o.seeds), c.train, o.jobs);
  write_curve(curve, fs::path(o.out) / "curve.csv");
  print_curve(curve);
  return 0;
}

int cmd_scalability(const Options& o) {
  Configs c = resolve(o, true);
  const AblationCurve curve = sweep_scalability(o.sizes, c.synth, seed_list(c, o.seeds), c.train, o.max_records);
  write_curve(curve, fs::path(o.out) / "curve.csv");
  print_curve(curve);
  const auto xs = curve.xs();
  if (xs.size() >= 2) {
    std::vector<double> secs;
    for (double x : xs) secs.push_back(curve.mean_seconds(x));
    std::cout << "exponent " << csv::format_double(fit_power_law(xs, secs).exponent) << '\n';
  }
  return 0;
}

int cmd_feature_modes(const Options& o) {
  Configs c = resolve(o, true);
  const DomainDataset a = load_normalized(o.domain_a);
  const DomainDataset b = load_normalized(o.domain_b);
  const auto rows = feature_mode_comparison(a, b, registry_for(o, a, b), seed_list(c, o.seeds), c.train, o.jobs);
  std::vector<MetricsReport> reports;
  const fs::path metrics = fs::path(o.out) / "metrics.csv";
  bool append = false;
  for (const auto& r : rows) {
    const std::vector<MetricsReport> f = {r.features.a, r.features.b};
    const std::vector<MetricsReport> i = {r.ids_only.a, r.ids_only.b};
    write_metrics("features_seed" + std::to_string(r.seed), f, metrics, append);
    write_metrics("ids_only_seed" + std::to_string(r.seed), i, metrics, true);
    append = true;
    std::cout << "seed " << r.seed << " features rmse " << csv::format_double(r.features.a.rmse) << '/'
              << csv::format_double(r.features.b.rmse) << " ids_only rmse "
              << csv::format_double(r.ids_only.a.rmse) << '/' << csv::format_double(r.ids_only.b.rmse) << '\n';
  }
  return 0;
}

int cmd_nmf_demo(const Options& o) {
  const std::uint64_t seed = o.seed.value_or(0);
  const auto [va, vb, x] = coupled_instance(o.rows, o.cols, 0.05, seed);

  const ConditionReport raw = check_conditions(va, vb, x, o.alpha);
  const fs::path out(o.out);
  write_text(out / "conditions.txt", "raw " + to_string(raw) + "\n");
  std::cout << "conditions " << to_string(raw) << '\n';

  NmfOptions opt;
  opt.rank = o.rank;
  opt.iterations = o.iterations;
  opt.seed = seed;
  const NmfState s = run_dual_nmf(va, vb, x, o.alpha, opt);
  write_text(out / "conditions.txt", "raw " + to_string(raw) + "\nperturbed " + to_string(s.conditions) +
                                         "\nperturbation " + csv::format_double(s.perturbation) + "\n");
  write_nmf_history(s.loss_history, out / "nmf_history.csv");
  const bool monotone = is_non_increasing(s.loss_history);
  std::cout << "perturbation " << csv::format_double(s.perturbation) << " final objective "
            << csv::format_double(s.loss_history.back()) << " relative change "
            << csv::format_double(final_relative_change(s.loss_history)) << '\n';
  if (!monotone) {
    std::cerr << "monotonicity-violated: objective increased during the run\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-domain recommendation with a learned orthogonal user mapping"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--config", o.config, "key=value config file");
    cmd->add_option("--epochs", o.epochs, "Maximum training epochs");
    cmd->add_option("--dim", o.dim, "Embedding dimension");
    cmd->add_option("--jobs", o.jobs, "Worker threads for sweeps");
  };
  auto domains = [&](CLI::App* cmd) {
    cmd->add_option("--domain-a", o.domain_a, "Domain A directory");
    cmd->add_option("--domain-b", o.domain_b, "Domain B directory");
    cmd->add_option("--registry", o.registry, "Overlap registry csv");
  };

  auto* synth = app.add_subcommand("synth", "Write a synthetic domain pair");
  common(synth);
  auto* train = app.add_subcommand("train", "Train on two domains");
  common(train);
  domains(train);
  auto* eval = app.add_subcommand("eval", "Score a trained model on its test split");
  common(eval);
  domains(eval);
  eval->add_option("--model", o.model, "Directory written by train (defaults to --out)");
  auto* ablate = app.add_subcommand("ablate-overlap", "Vary the number of overlap users");
  common(ablate);
  domains(ablate);
  ablate->add_option("--counts", o.counts, "Overlap counts")->delimiter(',');
  ablate->add_option("--mode", o.mode, "unlink or discard");
  ablate->add_option("--seeds", o.seeds, "Number of seeds");
  auto* sweep = app.add_subcommand("sweep-dim", "Vary the embedding dimension");
  common(sweep);
  domains(sweep);
  sweep->add_option("--dims", o.dims, "Dimensions")->delimiter(',');
  sweep->add_option("--seeds", o.seeds, "Number of seeds");
  auto* scal = app.add_subcommand("scalability", "Time training over growing data sizes");
  common(scal);
  scal->add_option("--sizes", o.sizes, "Record counts")->delimiter(',');
  scal->add_option("--max-records", o.max_records, "Skip sizes above this");
  scal->add_option("--seeds", o.seeds, "Number of seeds");
  auto* modes = app.add_subcommand("feature-modes", "Compare feature and id-only embeddings");
  common(modes);
  domains(modes);
  modes->add_option("--seeds", o.seeds, "Number of seeds");
  auto* nmf = app.add_subcommand("nmf-demo", "Dual matrix factorization demonstrator");
  common(nmf);
  nmf->add_option("--alpha", o.alpha, "Mixing weight");
  nmf->add_option("--rank", o.rank, "Factor rank");
  nmf->add_option("--iters", o.iterations, "Multiplicative update iterations");
  nmf->add_option("--rows", o.rows, "Rows of each rating matrix");
  nmf->add_option("--cols", o.cols, "Columns of each rating matrix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(o);
    if (train->parsed()) return cmd_train(o);
    if (eval->parsed()) return cmd_eval(o);
    if (ablate->parsed()) return cmd_ablate_overlap(o);
    if (sweep->parsed()) return cmd_sweep_dim(o);
    if (scal->parsed()) return cmd_scalability(o);
    if (modes->parsed()) return cmd_feature_modes(o);
    if (nmf->parsed()) return cmd_nmf_demo(o);
  } catch (const Error& e) {
    std::cerr << e.reason() << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal-error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
