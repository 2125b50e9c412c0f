// Python bindings for the DTOR pipeline: tabular loading, the native
// detectors, instance explanation and the benchmark harness. Rows cross the
// boundary as plain lists of floats; reports and records as dicts mirroring
// the JSON schemas.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <map>
#include <optional>
#include <set>

#include "dtor/dtor.hpp"
#include "dtor/rng.hpp"

namespace py = pybind11;
using namespace dtor;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("need at least one row");
    Matrix m(0, rows[0].size());
    for (const auto& row : rows) m.append_row(row);
    return m;
}

py::object json_to_py(const nlohmann::ordered_json& j) {
    switch (j.type()) {
        case nlohmann::ordered_json::value_t::object: {
            py::dict d;
            for (const auto& [key, value] : j.items()) d[py::str(key)] = json_to_py(value);
            return d;
        }
        case nlohmann::ordered_json::value_t::array: {
            py::list l;
            for (const auto& item : j) l.append(json_to_py(item));
            return l;
        }
        case nlohmann::ordered_json::value_t::string:
            return py::str(j.get<std::string>());
        case nlohmann::ordered_json::value_t::boolean:
            return py::bool_(j.get<bool>());
        case nlohmann::ordered_json::value_t::number_integer:
            return py::int_(j.get<long long>());
        case nlohmann::ordered_json::value_t::number_unsigned:
            return py::int_(j.get<unsigned long long>());
        case nlohmann::ordered_json::value_t::number_float:
            return py::float_(j.get<double>());
        default:
            return py::none();
    }
}

Dataset dataset_from_rows(const std::vector<std::vector<double>>& rows,
                          const std::vector<std::string>& names,
                          const std::vector<std::string>& kinds) {
    Dataset ds;
    ds.rows = matrix_from_rows(rows);
    const std::size_t d = ds.rows.n_cols;
    if (!names.empty() && names.size() != d)
        throw std::invalid_argument("names length does not match column count");
    if (!kinds.empty() && kinds.size() != d)
        throw std::invalid_argument("kinds length does not match column count");
    ds.meta.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        ds.meta[j].name = names.empty() ? "feature_" + std::to_string(j) : names[j];
        ds.meta[j].index = j;
        ds.meta[j].kind =
            kinds.empty() ? FeatureKind::Numeric : feature_kind_from_string(kinds[j]);
        if (ds.meta[j].kind == FeatureKind::Categorical) {
            std::set<long long> codes;
            for (std::size_t i = 0; i < ds.rows.n_rows; ++i) {
                const double v = ds.rows(i, j);
                if (v < 0 || v != std::floor(v))
                    throw std::invalid_argument("categorical columns need integer codes >= 0");
                codes.insert(static_cast<long long>(v));
            }
            ds.meta[j].codes.assign(codes.begin(), codes.end());
        }
    }
    return ds;
}

DtorConfig make_config(double beta_factor, std::size_t max_depth,
                       double min_impurity_decrease, std::size_t min_samples_leaf) {
    DtorConfig cfg;
    cfg.beta_factor = beta_factor;
    cfg.tree_params.max_depth = max_depth;
    cfg.tree_params.min_impurity_decrease = min_impurity_decrease;
    cfg.tree_params.min_samples_leaf = min_samples_leaf;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_dtor, m) {
    m.doc() = "Rule-based explanations for anomaly-detector scores";

    py::class_<Dataset>(m, "Dataset")
        .def_property_readonly("n_rows", &Dataset::n_rows)
        .def_property_readonly("n_cols", &Dataset::n_cols)
        .def_property_readonly("names",
                               [](const Dataset& ds) {
                                   std::vector<std::string> out;
                                   for (const auto& fm : ds.meta) out.push_back(fm.name);
                                   return out;
                               })
        .def_property_readonly("kinds",
                               [](const Dataset& ds) {
                                   std::vector<std::string> out;
                                   for (const auto& fm : ds.meta)
                                       out.push_back(to_string(fm.kind));
                                   return out;
                               })
        .def("row",
             [](const Dataset& ds, std::size_t i) {
                 if (i >= ds.n_rows()) throw py::index_error();
                 const auto r = ds.rows.row(i);
                 return std::vector<double>(r.begin(), r.end());
             })
        .def("rows",
             [](const Dataset& ds) {
                 std::vector<std::vector<double>> out;
                 for (std::size_t i = 0; i < ds.n_rows(); ++i) {
                     const auto r = ds.rows.row(i);
                     out.emplace_back(r.begin(), r.end());
                 }
                 return out;
             })
        .def("__len__", &Dataset::n_rows)
        .def("__repr__", [](const Dataset& ds) {
            return "<dtor.Dataset " + std::to_string(ds.n_rows()) + "x" +
                   std::to_string(ds.n_cols()) + ">";
        });

    m.def(
        "load_table",
        [](const std::string& path, const std::map<std::string, std::string>& kinds,
           const std::string& delimiter) {
            LoadOptions opts;
            for (const auto& [name, kind] : kinds)
                opts.kind_override[name] = feature_kind_from_string(kind);
            if (!delimiter.empty()) opts.delimiter = delimiter[0];
            return load_table(path, opts);
        },
        py::arg("path"), py::arg("kinds") = std::map<std::string, std::string>{},
        py::arg("delimiter") = "",
        "Load a delimiter-separated table with a header row");

    m.def("dataset_from_rows", &dataset_from_rows, py::arg("rows"),
          py::arg("names") = std::vector<std::string>{},
          py::arg("kinds") = std::vector<std::string>{},
          "Build a Dataset from a list of rows ('numeric'/'categorical' kinds)");

    m.def(
        "split_train_test",
        [](const Dataset& ds, std::size_t n_test, std::uint64_t seed) {
            auto split = split_train_test(ds, n_test, seed);
            return py::make_tuple(std::move(split.train), std::move(split.test),
                                  split.train_indices, split.test_indices);
        },
        py::arg("dataset"), py::arg("n_test"), py::arg("seed") = 42,
        "Seeded disjoint split; returns (train, test, train_indices, test_indices)");

    py::class_<Threshold>(m, "Threshold")
        .def_readonly("t", &Threshold::t)
        .def_readonly("contamination", &Threshold::contamination)
        .def("__repr__", [](const Threshold& th) {
            return "<dtor.Threshold t=" + format_double(th.t) + ">";
        });

    py::class_<Detector>(m, "Detector")
        .def_property_readonly("kind", &Detector::kind)
        .def_property_readonly("n_features", &Detector::n_features)
        .def(
            "score",
            [](const Detector& det, const std::vector<std::vector<double>>& rows) {
                return score(det, matrix_from_rows(rows));
            },
            py::arg("rows"), "Score rows; lower = more anomalous")
        .def("score_dataset",
             [](const Detector& det, const Dataset& ds) { return score(det, ds.rows); })
        .def("to_json", [](const Detector& det) { return det.to_json().dump(); });

    m.def(
        "fit_isolation_forest",
        [](const Dataset& train, std::size_t n_trees, std::size_t subsample,
           std::uint64_t seed) -> std::unique_ptr<Detector> {
            return std::make_unique<IsolationForest>(
                fit_isolation_forest(train, {n_trees, subsample, seed}));
        },
        py::arg("train"), py::arg("n_trees") = 100, py::arg("subsample") = 256,
        py::arg("seed") = 42);

    m.def(
        "fit_gmm",
        [](const Dataset& train, std::size_t k, std::uint64_t seed, double reg,
           std::size_t max_iter, double tol) -> std::unique_ptr<Detector> {
            return std::make_unique<GaussianMixture>(fit_gmm(train, {k, seed, reg, max_iter, tol}));
        },
        py::arg("train"), py::arg("k") = 4, py::arg("seed") = 42, py::arg("reg") = 1e-6,
        py::arg("max_iter") = 200, py::arg("tol") = 1e-4);

    m.def(
        "external_scorer",
        [](const std::string& command, std::size_t n_features) -> std::unique_ptr<Detector> {
            return std::make_unique<ExternalScorer>(command, n_features);
        },
        py::arg("command"), py::arg("n_features"),
        "Out-of-process scorer: CSV rows on stdin, one score per line on stdout");

    m.def("detector_from_json",
          [](const std::string& text) { return detector_from_json(nlohmann::json::parse(text)); });

    m.def("threshold_from_contamination", &threshold_from_contamination, py::arg("scores"),
          py::arg("contamination") = 0.05);
    m.def("is_outlier", &is_outlier, py::arg("score"), py::arg("threshold"));

    py::class_<Rule>(m, "Rule")
        .def_property_readonly("predicates",
                               [](const Rule& rule) {
                                   py::list out;
                                   for (const auto& p : rule.predicates)
                                       out.append(py::make_tuple(
                                           p.feature, p.op == PredOp::LE ? "LE" : "GT",
                                           p.threshold));
                                   return out;
                               })
        .def_property_readonly("leaf_value",
                               [](const Rule& rule) -> std::optional<double> {
                                   return rule.leaf_value;
                               })
        .def("__len__", &Rule::length)
        .def("__repr__", [](const Rule& rule) { return "<dtor.Rule " + render(rule) + ">"; });

    m.def(
        "satisfies",
        [](const Rule& rule, const std::vector<double>& z) { return satisfies(rule, z); },
        py::arg("rule"), py::arg("row"));
    m.def("simplify", &simplify, py::arg("rule"));
    m.def(
        "coverage",
        [](const Rule& rule, const Dataset& ds) { return coverage(rule, ds); },
        py::arg("rule"), py::arg("dataset"));
    m.def(
        "validity",
        [](const Rule& rule, const std::vector<double>& x) { return validity(rule, x); },
        py::arg("rule"), py::arg("row"));
    m.def(
        "render",
        [](const Rule& rule, const Dataset* ds) {
            return render(rule, ds ? ds->meta : std::vector<FeatureMeta>{});
        },
        py::arg("rule"), py::arg("dataset") = nullptr);
    m.def(
        "rule_to_json",
        [](const Rule& rule, const Dataset* ds) {
            return rule_to_json(rule, ds ? ds->meta : std::vector<FeatureMeta>{}).dump();
        },
        py::arg("rule"), py::arg("dataset") = nullptr);

    m.def(
        "explain_instance",
        [](const std::vector<double>& x, double y, const Dataset& train,
           const std::vector<double>& y_train, double beta_factor, std::size_t max_depth,
           double min_impurity_decrease, std::size_t min_samples_leaf) {
            const auto expl = explain_instance(
                x, y, train.rows, y_train,
                make_config(beta_factor, max_depth, min_impurity_decrease, min_samples_leaf));
            return py::make_tuple(expl.rule, tree_to_json(expl.tree).dump());
        },
        py::arg("x"), py::arg("y"), py::arg("train"), py::arg("y_train"),
        py::arg("beta_factor") = 0.1, py::arg("max_depth") = 8,
        py::arg("min_impurity_decrease") = 1e-5, py::arg("min_samples_leaf") = 1,
        "Fit the weighted surrogate tree and return (rule, tree_json)");

    m.def(
        "estimate_precision",
        [](double y, const Rule& rule, const Detector& model, const Threshold& th,
           const Dataset& train, const std::vector<double>& x, std::size_t n_gen,
           std::uint64_t seed) {
            Matrix X_aug = train.rows;
            X_aug.append_row(x);
            return estimate_precision(y, rule, model, th, X_aug, train.meta, n_gen, seed);
        },
        py::arg("y"), py::arg("rule"), py::arg("model"), py::arg("threshold"),
        py::arg("train"), py::arg("x"), py::arg("n_gen") = 1000, py::arg("seed") = 42,
        "Fraction of the synthetic neighborhood agreeing with the instance's side of t");

    m.def(
        "benchmark",
        [](const Dataset& train, const Dataset& test, const Detector& model,
           const Threshold& th, double beta_factor, std::size_t max_depth,
           double min_impurity_decrease, std::size_t min_samples_leaf, std::size_t n_gen,
           std::uint64_t seed) {
            const auto records = explain_test_set(
                train, test, model, th,
                make_config(beta_factor, max_depth, min_impurity_decrease, min_samples_leaf),
                n_gen, seed);
            nlohmann::ordered_json j;
            j["aggregates"] = report_to_json(aggregate(records), true);
            nlohmann::ordered_json recs = nlohmann::ordered_json::array();
            for (const auto& rec : records) recs.push_back(record_to_json(rec, train.meta, true));
            j["records"] = std::move(recs);
            return json_to_py(j);
        },
        py::arg("train"), py::arg("test"), py::arg("model"), py::arg("threshold"),
        py::arg("beta_factor") = 0.1, py::arg("max_depth") = 8,
        py::arg("min_impurity_decrease") = 1e-5, py::arg("min_samples_leaf") = 1,
        py::arg("n_gen") = 1000, py::arg("seed") = 42,
        "Explain every test row and aggregate; returns {'aggregates', 'records'}");

    m.attr("__version__") = "0.1.0";
}
