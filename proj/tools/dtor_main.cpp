// dtor: explain anomaly-detector scores with decision-path rules.
//
// Subcommands:
//   fit        load a table, split train/test, fit a detector, persist the
//              model artifact (detector + threshold + training scores) as JSON
//   explain    explain one instance (by row index or inline values) against a
//              fitted artifact: rule, precision, coverage, validity
//   benchmark  run the full pipeline over a held-out test set and emit a
//              records JSON report plus a summary table

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dtor/dtor.hpp"
#include "dtor/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct CommonOpts {
    std::string dataset;
    std::string kinds;
    std::string delimiter = "auto";
    std::string detector = "iforest";
    std::size_t n_trees = 100;
    std::size_t subsample = 256;
    std::size_t gmm_k = 4;
    double reg = 1e-6;
    std::string external_cmd;
    double contamination = 0.05;
    std::size_t n_test = 50;
    double beta_factor = 0.1;
    std::size_t max_depth = 8;
    double min_impurity_decrease = 1e-5;
    std::size_t min_samples_leaf = 1;
    std::size_t n_gen = 1000;
    std::uint64_t seed = 42;
    std::string output;
};

void add_dataset_flags(CLI::App* cmd, CommonOpts& opt, bool required) {
    auto* ds = cmd->add_option("--dataset", opt.dataset,
                               "Delimiter-separated table with a header row");
    if (required) ds->required();
    cmd->add_option("--kinds", opt.kinds,
                    "JSON file mapping column name to numeric|categorical");
    cmd->add_option("--delimiter", opt.delimiter,
                    "Cell delimiter: auto (default), comma, semicolon, tab");
}

void add_detector_flags(CLI::App* cmd, CommonOpts& opt) {
    cmd->add_option("--detector", opt.detector, "iforest | gmm | external")
        ->check(CLI::IsMember({"iforest", "gmm", "external"}));
    cmd->add_option("--n-trees", opt.n_trees, "Isolation forest ensemble size");
    cmd->add_option("--subsample", opt.subsample, "Isolation forest subsample size");
    cmd->add_option("--k", opt.gmm_k, "GMM component count");
    cmd->add_option("--reg", opt.reg, "GMM diagonal covariance floor");
    cmd->add_option("--external-cmd", opt.external_cmd,
                    "Shell command implementing the external scorer protocol");
    cmd->add_option("--contamination", opt.contamination,
                    "Assumed anomaly fraction, sets the score threshold");
    cmd->add_option("--n-test", opt.n_test, "Held-out test rows");
}

void add_explainer_flags(CLI::App* cmd, CommonOpts& opt) {
    cmd->add_option("--beta-factor", opt.beta_factor,
                    "Instance weight as a fraction of the training size");
    cmd->add_option("--max-depth", opt.max_depth, "Surrogate tree depth cap");
    cmd->add_option("--min-impurity-decrease", opt.min_impurity_decrease,
                    "Minimum weighted impurity decrease per split");
    cmd->add_option("--min-samples-leaf", opt.min_samples_leaf, "Minimum rows per leaf");
    cmd->add_option("--n-gen", opt.n_gen, "Synthetic neighborhood size");
}

dtor::LoadOptions load_options(const CommonOpts& opt) {
    dtor::LoadOptions lo;
    if (opt.delimiter == "comma") {
        lo.delimiter = ',';
    } else if (opt.delimiter == "semicolon") {
        lo.delimiter = ';';
    } else if (opt.delimiter == "tab") {
        lo.delimiter = '\t';
    } else if (opt.delimiter != "auto") {
        throw CLI::ValidationError("--delimiter must be auto|comma|semicolon|tab");
    }
    if (!opt.kinds.empty()) lo.kind_override = dtor::read_kind_override(opt.kinds);
    return lo;
}

ordered_json config_echo(const CommonOpts& opt) {
    ordered_json j;
    j["dataset"] = opt.dataset;
    j["kinds"] = opt.kinds;
    j["delimiter"] = opt.delimiter;
    j["detector"] = opt.detector;
    j["n_trees"] = opt.n_trees;
    j["subsample"] = opt.subsample;
    j["k"] = opt.gmm_k;
    j["reg"] = opt.reg;
    j["external_cmd"] = opt.external_cmd;
    j["contamination"] = opt.contamination;
    j["n_test"] = opt.n_test;
    j["beta_factor"] = opt.beta_factor;
    j["max_depth"] = opt.max_depth;
    j["min_impurity_decrease"] = opt.min_impurity_decrease;
    j["min_samples_leaf"] = opt.min_samples_leaf;
    j["n_gen"] = opt.n_gen;
    j["seed"] = opt.seed;
    return j;
}

std::unique_ptr<dtor::Detector> fit_detector(const CommonOpts& opt, const dtor::Dataset& train) {
    if (opt.detector == "iforest") {
        dtor::IsolationForestParams params;
        params.n_trees = opt.n_trees;
        params.subsample = opt.subsample;
        params.seed = opt.seed;
        return std::make_unique<dtor::IsolationForest>(fit_isolation_forest(train, params));
    }
    if (opt.detector == "gmm") {
        dtor::GmmParams params;
        params.k = opt.gmm_k;
        params.seed = opt.seed;
        params.reg = opt.reg;
        return std::make_unique<dtor::GaussianMixture>(fit_gmm(train, params));
    }
    if (opt.external_cmd.empty())
        throw CLI::ValidationError("--external-cmd is required with --detector external");
    return std::make_unique<dtor::ExternalScorer>(opt.external_cmd, train.n_cols());
}

dtor::DtorConfig explainer_config(const CommonOpts& opt) {
    dtor::DtorConfig cfg;
    cfg.beta_factor = opt.beta_factor;
    cfg.tree_params.max_depth = opt.max_depth;
    cfg.tree_params.min_impurity_decrease = opt.min_impurity_decrease;
    cfg.tree_params.min_samples_leaf = opt.min_samples_leaf;
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ------------------------------------------------------------------ fit

int run_fit(const CommonOpts& opt) {
    const auto ds = dtor::load_table(opt.dataset, load_options(opt));
    const auto split = dtor::split_train_test(ds, opt.n_test, opt.seed);
    const auto detector = fit_detector(opt, split.train);
    const auto train_scores = dtor::score(*detector, split.train.rows);
    const auto th = dtor::threshold_from_contamination(train_scores, opt.contamination);

    ordered_json artifact;
    artifact["format"] = "dtor-model/1";
    artifact["config"] = config_echo(opt);
    artifact["features"] = dtor::feature_meta_to_json(ds.meta);
    artifact["split"]["n_test"] = opt.n_test;
    artifact["split"]["seed"] = opt.seed;
    artifact["split"]["train_indices"] = split.train_indices;
    artifact["split"]["test_indices"] = split.test_indices;
    artifact["detector"] = detector->to_json();
    artifact["threshold"]["t"] = th.t;
    artifact["threshold"]["contamination"] = th.contamination;
    artifact["train_scores"] = train_scores;

    write_file(opt.output, artifact.dump(2) + "\n");
    std::size_t flagged = 0;
    for (const double s : train_scores) flagged += dtor::is_outlier(s, th);
    std::cerr << "fitted " << opt.detector << " on " << split.train.n_rows() << " rows, t="
              << th.t << " (" << flagged << " training outliers); wrote " << opt.output
              << "\n";
    return 0;
}

// ------------------------------------------------------------------ explain

struct ExplainOpts {
    std::string model;
    std::string dataset_override;
    long long row_index = -1;  // -1: use --row instead
    std::string inline_row;
    bool canonical = false;
    bool annotate = false;
    std::string dump_synth;
    std::string tree_output;

    bool has_row_index() const { return row_index >= 0; }
};

std::vector<double> parse_inline_row(const std::string& text, std::size_t d) {
    std::vector<double> row;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            const std::string cell = text.substr(start, i - start);
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw std::runtime_error("cannot parse inline row cell '" + cell + "'");
            }
            start = i + 1;
        }
    }
    if (row.size() != d) {
        throw std::runtime_error("inline row has " + std::to_string(row.size()) +
                                 " values, dataset has " + std::to_string(d) + " columns");
    }
    return row;
}

int run_explain(const CommonOpts& opt, const ExplainOpts& eopt) {
    std::ifstream in(eopt.model);
    if (!in) throw std::runtime_error("cannot open model artifact " + eopt.model);
    json artifact;
    in >> artifact;
    if (artifact.value("format", "") != "dtor-model/1")
        throw std::runtime_error("unrecognized model artifact format");

    const auto meta = dtor::feature_meta_from_json(artifact.at("features"));
    const std::string data_path = !eopt.dataset_override.empty()
                                      ? eopt.dataset_override
                                      : artifact.at("config").at("dataset").get<std::string>();
    dtor::LoadOptions lo;
    for (const auto& fm : meta) lo.kind_override[fm.name] = fm.kind;  // pin artifact kinds
    const auto ds = dtor::load_table(data_path, lo);
    if (ds.n_cols() != meta.size())
        throw std::runtime_error("dataset width does not match the model artifact");

    const auto train_indices = artifact.at("split").at("train_indices").get<std::vector<std::size_t>>();
    const auto train = ds.select(train_indices);
    const auto y_train = artifact.at("train_scores").get<std::vector<double>>();
    if (y_train.size() != train.n_rows())
        throw std::runtime_error("stored train scores do not match the split");

    const auto detector = dtor::detector_from_json(artifact.at("detector"));
    const dtor::Threshold th{artifact.at("threshold").at("t").get<double>(),
                             artifact.at("threshold").at("contamination").get<double>()};

    std::vector<double> x;
    ordered_json instance_echo;
    if (eopt.has_row_index()) {
        const auto idx = static_cast<std::size_t>(eopt.row_index);
        if (idx >= ds.n_rows())
            throw std::runtime_error("--row-index out of range (dataset has " +
                                     std::to_string(ds.n_rows()) + " rows)");
        const auto row = ds.rows.row(idx);
        x.assign(row.begin(), row.end());
        instance_echo["row_index"] = idx;
    } else {
        x = parse_inline_row(eopt.inline_row, ds.n_cols());
        instance_echo["inline"] = true;
    }
    instance_echo["values"] = x;

    dtor::Matrix one(0, ds.n_cols());
    one.append_row(x);
    const double y_expl = dtor::score(*detector, one)[0];

    using Clock = std::chrono::steady_clock;
    const auto t0 = Clock::now();
    const auto expl = dtor::explain_instance(x, y_expl, train.rows, y_train,
                                             explainer_config(opt));
    const double explain_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

    dtor::Matrix X_aug = train.rows;
    X_aug.append_row(x);
    const auto t1 = Clock::now();
    const auto precision = dtor::estimate_precision_detailed(y_expl, expl.rule, *detector, th,
                                                             X_aug, meta, opt.n_gen, opt.seed);
    const double precision_seconds = std::chrono::duration<double>(Clock::now() - t1).count();

    ordered_json out;
    out["format"] = "dtor-explanation/1";
    out["config"] = config_echo(opt);
    // reflect what the artifact actually supplied
    out["config"]["model"] = eopt.model;
    out["config"]["dataset"] = data_path;
    out["config"]["detector"] = detector->kind();
    out["config"]["contamination"] = th.contamination;
    out["config"]["n_test"] = artifact.at("split").at("n_test").get<std::size_t>();
    out["instance"] = instance_echo;
    out["anomaly_score"] = y_expl;
    out["threshold"] = th.t;
    out["is_outlier"] = dtor::is_outlier(y_expl, th);
    out["rule"] = dtor::rule_to_json(expl.rule, meta);
    if (eopt.annotate) out["rendered_annotated"] = dtor::render_annotated(expl.rule, meta);
    out["leaf_value"] = expl.tree.predict(x);
    out["precision"] = precision.precision;
    out["coverage"] = dtor::coverage(expl.rule, train);
    out["validity"] = dtor::validity(expl.rule, x);
    out["rule_length"] = expl.rule.length();
    if (!eopt.canonical) {
        out["timings"]["explain_seconds"] = explain_seconds;
        out["timings"]["precision_seconds"] = precision_seconds;
        out["timings"]["wall_seconds"] = explain_seconds + precision_seconds;
    }

    const std::string payload =
        eopt.canonical ? dtor::canonical_dump(out) + "\n" : out.dump(2) + "\n";
    if (!opt.output.empty()) {
        write_file(opt.output, payload);
    } else {
        std::cout << payload;
    }

    if (!eopt.tree_output.empty())
        write_file(eopt.tree_output, dtor::tree_to_json(expl.tree).dump(2) + "\n");

    if (!eopt.dump_synth.empty()) {
        std::string synth_csv;
        for (std::size_t j = 0; j < meta.size(); ++j) synth_csv += meta[j].name + ",";
        synth_csv += "source_row\n";
        for (std::size_t i = 0; i < precision.synth.rows.n_rows; ++i) {
            for (std::size_t j = 0; j < precision.synth.rows.n_cols; ++j)
                synth_csv += dtor::format_double(precision.synth.rows(i, j)) + ",";
            synth_csv += std::to_string(precision.synth.provenance[i]) + "\n";
        }
        write_file(eopt.dump_synth, synth_csv);
    }

    std::cerr << "rule: " << dtor::render(expl.rule, meta) << "  (precision "
              << precision.precision << ", outlier " << (dtor::is_outlier(y_expl, th) ? "yes" : "no")
              << ")\n";
    return 0;
}

// ------------------------------------------------------------------ benchmark

struct BenchmarkOpts {
    std::string table_output;
    std::string canonical_output;
};

int run_benchmark(const CommonOpts& opt, const BenchmarkOpts& bopt) {
    const auto ds = dtor::load_table(opt.dataset, load_options(opt));
    const auto split = dtor::split_train_test(ds, opt.n_test, opt.seed);
    const auto detector = fit_detector(opt, split.train);
    const auto train_scores = dtor::score(*detector, split.train.rows);
    const auto th = dtor::threshold_from_contamination(train_scores, opt.contamination);

    std::size_t done = 0;
    const auto log_record = [&](const dtor::ExplanationRecord& rec) {
        ++done;
        std::cerr << "[" << done << "/" << split.test.n_rows() << "] ";
        if (rec.ok()) {
            std::cerr << "outlier=" << (rec.is_outlier ? "yes" : "no ")
                      << " len=" << rec.rule_length << " precision=" << rec.precision
                      << " coverage=" << rec.coverage << " time=" << rec.wall_seconds << "s\n";
        } else {
            std::cerr << "error: " << *rec.error << "\n";
        }
    };

    const auto records = dtor::explain_test_set(split.train, split.test, *detector, th,
                                                explainer_config(opt), opt.n_gen, opt.seed,
                                                log_record);
    const auto report = dtor::aggregate(records);

    const std::string dataset_id = fs::path(opt.dataset).stem().string();
    const std::string table = dtor::format_report_table(report, dataset_id, detector->kind());
    std::cout << table;

    const auto build_json = [&](bool timings) {
        ordered_json j;
        j["format"] = "dtor-report/1";
        j["config"] = config_echo(opt);
        j["dataset"]["path"] = opt.dataset;
        j["dataset"]["n_rows"] = ds.n_rows();
        j["dataset"]["n_cols"] = ds.n_cols();
        j["features"] = dtor::feature_meta_to_json(ds.meta);
        j["split"]["train_indices"] = split.train_indices;
        j["split"]["test_indices"] = split.test_indices;
        j["threshold"]["t"] = th.t;
        j["threshold"]["contamination"] = th.contamination;
        j["detector_kind"] = detector->kind();
        j["aggregates"] = dtor::report_to_json(report, timings);
        ordered_json recs = ordered_json::array();
        for (const auto& rec : records)
            recs.push_back(dtor::record_to_json(rec, ds.meta, timings));
        j["records"] = std::move(recs);
        return j;
    };

    if (!opt.output.empty()) write_file(opt.output, build_json(true).dump(2) + "\n");
    if (!bopt.canonical_output.empty())
        write_file(bopt.canonical_output, dtor::canonical_dump(build_json(false)) + "\n");
    if (!bopt.table_output.empty()) write_file(bopt.table_output, table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rule-based explanations for anomaly-detector scores"};
    app.require_subcommand(1);

    CommonOpts opt;

    auto* fit = app.add_subcommand("fit", "Fit a detector and persist the model artifact");
    add_dataset_flags(fit, opt, true);
    add_detector_flags(fit, opt);
    fit->add_option("--seed", opt.seed, "Seed for split and detector randomness");
    fit->add_option("--output", opt.output, "Model artifact path")->required();

    ExplainOpts eopt;
    auto* explain = app.add_subcommand("explain", "Explain one instance");
    explain->add_option("--model", eopt.model, "Model artifact from `dtor fit`")->required();
    explain->add_option("--dataset", eopt.dataset_override,
                        "Override the dataset path stored in the artifact");
    auto* row_index_opt =
        explain->add_option("--row-index", eopt.row_index, "Explain this dataset row (0-based)")
            ->check(CLI::NonNegativeNumber);
    auto* inline_opt = explain->add_option("--row", eopt.inline_row,
                                           "Explain an inline row: comma-separated values in "
                                           "dataset column order");
    row_index_opt->excludes(inline_opt);
    add_explainer_flags(explain, opt);
    explain->add_option("--seed", opt.seed, "Seed for the synthetic neighborhood");
    explain->add_option("--output", opt.output, "Explanation JSON path (default stdout)");
    explain->add_flag("--canonical", eopt.canonical,
                      "Canonical JSON output: sorted keys, 17-digit floats, no timings");
    explain->add_flag("--annotate-categories", eopt.annotate,
                      "Add a rendering with categorical predicates as code sets");
    explain->add_option("--dump-synth", eopt.dump_synth,
                        "Write the synthetic neighborhood (with source rows) as CSV");
    explain->add_option("--tree-output", eopt.tree_output, "Write the fitted tree as JSON");

    BenchmarkOpts bopt;
    auto* benchmark =
        app.add_subcommand("benchmark", "Explain a held-out test set and aggregate");
    add_dataset_flags(benchmark, opt, true);
    add_detector_flags(benchmark, opt);
    add_explainer_flags(benchmark, opt);
    benchmark->add_option("--seed", opt.seed, "Master seed; per-instance seeds derive from it");
    benchmark->add_option("--output", opt.output, "Report JSON path")->required();
    benchmark->add_option("--table", bopt.table_output, "Summary table path");
    benchmark->add_option("--canonical-output", bopt.canonical_output,
                          "Canonical report JSON (golden-file form, no timings)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) return run_fit(opt);
        if (explain->parsed()) {
            if (!eopt.has_row_index() && eopt.inline_row.empty())
                throw std::runtime_error("explain needs --row-index or --row");
            return run_explain(opt, eopt);
        }
        if (benchmark->parsed()) return run_benchmark(opt, bopt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
