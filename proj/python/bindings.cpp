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


#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dml/config.hpp"
#include "dml/data.hpp"
#include "dml/error.hpp"
#include "dml/eval.hpp"
#include "dml/mapping.hpp"
#include "dml/nmf.hpp"
#include "dml/trainer.hpp"

namespace py = pybind11;
using namespace dml;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array");
  const auto r = static_cast<std::size_t>(a.shape(0));
  const auto c = static_cast<std::size_t>(a.shape(1));
  return Matrix(r, c, std::vector<double>(a.data(), a.data() + r * c));
}

Vector to_vector(const Array& a) {
  if (a.ndim() != 1) throw ShapeError("expected a 1-d array");
  return Vector(a.data(), a.data() + a.shape(0));
}

Array from_matrix(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), out.mutable_data());
  return out;
}

Array from_vector(const Vector& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

std::vector<EmbeddingPair> to_pairs(const Array& a, const Array& b) {
  const Matrix ma = to_matrix(a), mb = to_matrix(b);
  if (ma.rows() != mb.rows() || ma.cols() != mb.cols()) throw ShapeError("pair arrays differ in shape");
  std::vector<EmbeddingPair> pairs;
  for (std::size_t i = 0; i < ma.rows(); ++i) {
    pairs.push_back({Vector(ma.row(i).begin(), ma.row(i).end()), Vector(mb.row(i).begin(), mb.row(i).end())});
  }
  return pairs;
}

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["domain"] = r.domain;
  d["rmse"] = r.rmse;
  d["mae"] = r.mae;
  d["precision_at_k"] = r.precision_at_k;
  d["recall_at_k"] = r.recall_at_k;
  d["n_test"] = r.n_test;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cross-domain recommendation with an orthogonal user mapping";

  static PyObject* error_type = py::exception<Error>(m, "DmlError").release().ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      err.attr("reason") = e.reason();
      PyErr_SetObject(error_type, err.ptr());
    }
  });

  py::class_<RatingRecord>(m, "RatingRecord")
      .def(py::init<>())
      .def(py::init([](std::string u, std::string i, double r) { return RatingRecord{u, i, r, 0}; }))
      .def_readwrite("user_id", &RatingRecord::user_id)
      .def_readwrite("item_id", &RatingRecord::item_id)
      .def_readwrite("rating", &RatingRecord::rating)
      .def_readwrite("timestamp", &RatingRecord::timestamp);

  py::class_<DomainDataset>(m, "DomainDataset")
      .def(py::init<>())
      .def_readwrite("name", &DomainDataset::name)
      .def_readwrite("ratings", &DomainDataset::ratings)
      .def_readwrite("user_features", &DomainDataset::user_features)
      .def_readwrite("item_features", &DomainDataset::item_features)
      .def("user_ids", &DomainDataset::user_ids)
      .def("item_ids", &DomainDataset::item_ids)
      .def("validate", &DomainDataset::validate);

  py::class_<OverlapRegistry>(m, "OverlapRegistry")
      .def(py::init<>())
      .def_property(
          "pairs",
          [](const OverlapRegistry& r) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& p : r.pairs) out.emplace_back(p.a, p.b);
            return out;
          },
          [](OverlapRegistry& r, const std::vector<std::pair<std::string, std::string>>& v) {
            r.pairs.clear();
            for (const auto& [a, b] : v) r.pairs.push_back({a, b});
          })
      .def("__len__", &OverlapRegistry::size);

  py::class_<SyntheticConfig>(m, "SyntheticConfig")
      .def(py::init<>())
      .def_readwrite("users_per_domain", &SyntheticConfig::users_per_domain)
      .def_readwrite("items_per_domain", &SyntheticConfig::items_per_domain)
      .def_readwrite("latent_dim", &SyntheticConfig::latent_dim)
      .def_readwrite("overlap_count", &SyntheticConfig::overlap_count)
      .def_readwrite("ratings_per_user", &SyntheticConfig::ratings_per_user)
      .def_readwrite("noise_std", &SyntheticConfig::noise_std)
      .def_readwrite("user_feature_dim", &SyntheticConfig::user_feature_dim)
      .def_readwrite("item_feature_dim", &SyntheticConfig::item_feature_dim)
      .def_readwrite("feature_noise_std", &SyntheticConfig::feature_noise_std)
      .def_readwrite("seed", &SyntheticConfig::seed);

  py::class_<SyntheticPair>(m, "SyntheticPair")
      .def_readonly("a", &SyntheticPair::a)
      .def_readonly("b", &SyntheticPair::b)
      .def_readonly("registry", &SyntheticPair::registry)
      .def_property_readonly("planted_map", [](const SyntheticPair& p) { return from_matrix(p.planted_map); });

  m.def("generate_synthetic_pair", &generate_synthetic_pair, py::arg("config") = SyntheticConfig{});

  py::enum_<FeatureMode>(m, "FeatureMode")
      .value("FEATURES", FeatureMode::kFeatures)
      .value("IDS_ONLY", FeatureMode::kIdsOnly);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("convergence_eps", &TrainConfig::convergence_eps)
      .def_readwrite("lr_rs", &TrainConfig::lr_rs)
      .def_readwrite("lr_map", &TrainConfig::lr_map)
      .def_readwrite("lr_embedding", &TrainConfig::lr_embedding)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("feature_mode", &TrainConfig::feature_mode)
      .def_readwrite("embedding_dim", &TrainConfig::embedding_dim)
      .def_readwrite("hidden", &TrainConfig::hidden)
      .def_readwrite("dropout_rate", &TrainConfig::dropout_rate)
      .def_readwrite("autoencoder_epochs", &TrainConfig::autoencoder_epochs)
      .def_readwrite("autoencoder_lr", &TrainConfig::autoencoder_lr)
      .def_readwrite("validation_fraction", &TrainConfig::validation_fraction)
      .def_readwrite("cross_domain", &TrainConfig::cross_domain)
      .def("validate", &TrainConfig::validate)
      .def("__repr__", [](const TrainConfig& c) { return describe(c); });

  py::class_<Preset>(m, "Preset").def_readonly("synth", &Preset::synth).def_readonly("train", &Preset::train);
  m.def("sparse_preset", &sparse_preset);

  py::class_<EpochRecord>(m, "EpochRecord")
      .def_readonly("epoch", &EpochRecord::epoch)
      .def_readonly("loss_a", &EpochRecord::loss_a)
      .def_readonly("loss_b", &EpochRecord::loss_b)
      .def_readonly("loss_overlap_a", &EpochRecord::loss_overlap_a)
      .def_readonly("loss_overlap_b", &EpochRecord::loss_overlap_b)
      .def_readonly("loss_cross_a", &EpochRecord::loss_cross_a)
      .def_readonly("loss_cross_b", &EpochRecord::loss_cross_b)
      .def_readonly("val_a", &EpochRecord::val_a)
      .def_readonly("val_b", &EpochRecord::val_b)
      .def("total_training_loss", &EpochRecord::total_training_loss);

  py::enum_<DomainTag>(m, "Domain").value("A", DomainTag::kA).value("B", DomainTag::kB);

  py::class_<DualTrainerState>(m, "TrainerState")
      .def_readonly("epoch", &DualTrainerState::epoch)
      .def_readonly("converged", &DualTrainerState::converged)
      .def_readonly("history", &DualTrainerState::history)
      .def_readonly("max_orthogonality_defect", &DualTrainerState::max_orthogonality_defect)
      .def_property_readonly("mapping", [](const DualTrainerState& s) { return from_matrix(s.mapping.matrix()); })
      .def("predict", [](const DualTrainerState& s, DomainTag d, const std::string& u, const std::string& i) {
        return predict_final(s, d, u, i);
      })
      .def("evaluate", [](const DualTrainerState& s, DomainTag d, const DomainDataset& test) {
        return report_dict(evaluate(s, d, test.ratings));
      });

  m.def("train", &train, py::arg("a"), py::arg("b"), py::arg("registry"), py::arg("config") = TrainConfig{},
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "holdout_run",
      [](const DomainDataset& a, const DomainDataset& b, const OverlapRegistry& reg, const TrainConfig& cfg) {
        RunResult r;
        {
          py::gil_scoped_release release;
          r = holdout_run(a, b, reg, cfg);
        }
        py::dict d;
        d["a"] = report_dict(r.a);
        d["b"] = report_dict(r.b);
        d["seconds"] = r.seconds;
        d["epochs"] = r.epochs;
        d["converged"] = r.converged;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("registry"), py::arg("config") = TrainConfig{});

  m.def("map_forward", [](const Array& x, const Array& e) {
    return from_vector(map_forward(OrthogonalMap(to_matrix(x)), to_vector(e)));
  });
  m.def("map_inverse", [](const Array& x, const Array& e) {
    return from_vector(map_inverse(OrthogonalMap(to_matrix(x)), to_vector(e)));
  });
  m.def(
      "alignment_loss",
      [](const Array& x, const Array& a, const Array& b) {
        const auto l = alignment_loss(to_matrix(x), to_pairs(a, b));
        return std::make_pair(l.primal, l.dual);
      },
      "Sum of ||X a - b||^2 and of ||X^T b - a||^2 over the rows of a and b.");
  m.def(
      "update_mapping",
      [](const Array& x, const Array& a, const Array& b, double lr) {
        const auto u = update_mapping(OrthogonalMap(to_matrix(x)), to_pairs(a, b), lr);
        return std::make_pair(from_matrix(u.map.matrix()), u.loss);
      },
      py::arg("x"), py::arg("a"), py::arg("b"), py::arg("lr"));
  m.def("compose_mappings", [](const std::vector<Array>& maps) {
    std::vector<OrthogonalMap> ms;
    for (const auto& a : maps) ms.emplace_back(to_matrix(a));
    return from_matrix(compose_mappings(ms).matrix());
  });
  m.def("procrustes_oracle", [](const Array& a, const Array& b) {
    const auto pairs = to_pairs(a, b);
    std::vector<Vector> s, t;
    for (const auto& p : pairs) {
      s.push_back(p.a);
      t.push_back(p.b);
    }
    return from_matrix(procrustes_oracle(s, t));
  });
  m.def("min_overlap_required", &min_overlap_required);
  m.def("orthogonality_defect", [](const Array& x) { return orthogonality_defect(to_matrix(x)); });

  m.def("rmse", [](const std::vector<double>& p, const std::vector<double>& t) { return rmse(p, t); });
  m.def("mae", [](const std::vector<double>& p, const std::vector<double>& t) { return mae(p, t); });
  m.def(
      "improvement_pct",
      [](double ours, double baseline, bool lower_is_better) {
        return improvement_pct(ours, baseline, lower_is_better ? Direction::kLowerBetter : Direction::kHigherBetter);
      },
      py::arg("ours"), py::arg("baseline"), py::arg("lower_is_better") = true);
  m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
    const auto r = paired_t_test(a, b);
    py::dict d;
    d["t"] = r.t;
    d["p_value"] = r.p_value;
    d["df"] = r.df;
    d["mean_difference"] = r.mean_difference;
    return d;
  });

  m.def(
      "coupled_nmf_instance",
      [](std::size_t rows, std::size_t cols, double noise, std::uint64_t seed) {
        const auto inst = coupled_instance(rows, cols, noise, seed);
        return py::make_tuple(from_matrix(inst.v_a), from_matrix(inst.v_b), from_matrix(inst.x));
      },
      py::arg("rows") = 12, py::arg("cols") = 10, py::arg("noise") = 0.05, py::arg("seed") = 0);
  m.def(
      "run_dual_nmf",
      [](const Array& va, const Array& vb, const Array& x, double alpha, std::size_t rank, std::size_t iterations,
         std::uint64_t seed) {
        NmfOptions opt;
        opt.rank = rank;
        opt.iterations = iterations;
        opt.seed = seed;
        const NmfState s = run_dual_nmf(to_matrix(va), to_matrix(vb), to_matrix(x), alpha, opt);
        py::dict d;
        d["loss_history"] = s.loss_history;
        d["perturbation"] = s.perturbation;
        d["conditions"] = to_string(s.conditions);
        d["reconstruction_a"] = from_matrix(s.reconstruction_a);
        d["reconstruction_b"] = from_matrix(s.reconstruction_b);
        return d;
      },
      py::arg("v_a"), py::arg("v_b"), py::arg("x"), py::arg("alpha") = 0.3, py::arg("rank") = 3,
      py::arg("iterations") = 500, py::arg("seed") = 0);
}
