#include "dtor/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "dtor/rng.hpp"

namespace dtor {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Moments {
    double mean = 0.0;
    double std_dev = 0.0;  // population
};

template <typename Get>
Moments moments_over(const std::vector<ExplanationRecord>& records, Get&& get) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (!r.ok()) continue;
        sum += get(r);
        ++n;
    }
    Moments m;
    if (n == 0) return m;
    m.mean = sum / static_cast<double>(n);
    double dev = 0.0;
    for (const auto& r : records) {
        if (!r.ok()) continue;
        const double d = get(r) - m.mean;
        dev += d * d;
    }
    m.std_dev = std::sqrt(dev / static_cast<double>(n));
    return m;
}

}  // namespace

std::vector<ExplanationRecord> explain_test_set(const Dataset& train, const Dataset& test,
                                                const Detector& model, const Threshold& th,
                                                const DtorConfig& cfg, std::size_t n_gen,
                                                std::uint64_t seed,
                                                const RecordCallback& on_record) {
    if (test.n_rows() == 0) throw std::invalid_argument("explain_test_set: empty test set");
    if (train.n_cols() != test.n_cols())
        throw std::invalid_argument("explain_test_set: train/test width mismatch");

    const std::vector<double> y_train = score(model, train.rows);

    std::vector<ExplanationRecord> records;
    records.reserve(test.n_rows());
    for (std::size_t i = 0; i < test.n_rows(); ++i) {
        ExplanationRecord rec;
        rec.index = i;
        const std::uint64_t instance_seed = derive_seed(seed, i);
        const auto x = test.rows.row(i);
        try {
            Matrix one(0, test.n_cols());
            one.append_row(x);
            rec.anomaly_score = score(model, one)[0];
            rec.is_outlier = is_outlier(rec.anomaly_score, th);

            const auto t_explain = Clock::now();
            Explanation expl =
                explain_instance(x, rec.anomaly_score, train.rows, y_train, cfg);
            rec.explain_seconds = seconds_since(t_explain);

            const auto t_precision = Clock::now();
            Matrix X_aug = train.rows;
            X_aug.append_row(x);
            rec.precision = estimate_precision(rec.anomaly_score, expl.rule, model, th,
                                               X_aug, train.meta, n_gen, instance_seed);
            rec.precision_seconds = seconds_since(t_precision);

            rec.coverage = coverage(expl.rule, train);
            rec.validity = validity(expl.rule, x);
            rec.rule_length = expl.rule.length();
            rec.rendered = render(expl.rule, train.meta);
            rec.rule = std::move(expl.rule);
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        rec.wall_seconds = rec.explain_seconds + rec.precision_seconds;
        if (on_record) on_record(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

BenchmarkReport aggregate(const std::vector<ExplanationRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate: no records");

    BenchmarkReport report;
    report.n_records = records.size();
    for (const auto& r : records) report.n_errors += !r.ok();
    if (report.n_errors == records.size())
        throw std::runtime_error("aggregate: every record failed");

    const auto precision = moments_over(records, [](const auto& r) { return r.precision; });
    const auto cov = moments_over(records, [](const auto& r) { return r.coverage; });
    const auto val = moments_over(records, [](const auto& r) { return double(r.validity); });
    const auto len =
        moments_over(records, [](const auto& r) { return double(r.rule_length); });
    const auto wall = moments_over(records, [](const auto& r) { return r.wall_seconds; });

    report.precision_mean = precision.mean;
    report.precision_std = precision.std_dev;
    report.coverage_mean = cov.mean;
    report.coverage_std = cov.std_dev;
    report.validity_percent = 100.0 * val.mean;
    report.rule_length_mean = len.mean;
    report.time_mean = wall.mean;
    for (const auto& r : records)
        if (r.ok() && r.wall_seconds > report.time_max) report.time_max = r.wall_seconds;
    return report;
}

std::string format_report_table(const BenchmarkReport& report, const std::string& dataset_id,
                                const std::string& detector_id) {
    char buf[256];
    std::string out;
    out += "dataset: " + dataset_id + "   detector: " + detector_id + "   method: DTOR\n";
    std::snprintf(buf, sizeof buf, "Exec. time    %.2f (%.2f)\n", report.time_mean,
                  report.time_max);
    out += buf;
    std::snprintf(buf, sizeof buf, "Precision     %.2f +/- %.2f\n", report.precision_mean,
                  report.precision_std);
    out += buf;
    std::snprintf(buf, sizeof buf, "Coverage      %.2f +/- %.2f\n", report.coverage_mean,
                  report.coverage_std);
    out += buf;
    std::snprintf(buf, sizeof buf, "Validity %%    %.6g\n", report.validity_percent);
    out += buf;
    std::snprintf(buf, sizeof buf, "Rule length   %.2f\n", report.rule_length_mean);
    out += buf;
    if (report.n_errors > 0) {
        std::snprintf(buf, sizeof buf, "Errors        %zu of %zu\n", report.n_errors,
                      report.n_records);
        out += buf;
    }
    return out;
}

}  // namespace dtor
