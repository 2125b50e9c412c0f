#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dtor/dataset.hpp"
#include "dtor/detect.hpp"
#include "dtor/explain.hpp"
#include "dtor/neighborhood.hpp"
#include "dtor/rules.hpp"

namespace dtor {

struct ExplanationRecord {
    std::size_t index = 0;  // position in the test set
    Rule rule;
    std::string rendered;
    double anomaly_score = 0.0;
    bool is_outlier = false;
    double precision = 0.0;
    double coverage = 0.0;
    int validity = 0;
    std::size_t rule_length = 0;
    double explain_seconds = 0.0;
    double precision_seconds = 0.0;
    double wall_seconds = 0.0;  // explain + precision
    std::optional<std::string> error;

    bool ok() const { return !error.has_value(); }
};

struct BenchmarkReport {
    std::size_t n_records = 0;
    std::size_t n_errors = 0;
    double time_mean = 0.0;
    double time_max = 0.0;
    double precision_mean = 0.0;
    double precision_std = 0.0;  // population std over the test set
    double coverage_mean = 0.0;
    double coverage_std = 0.0;
    double validity_percent = 0.0;
    double rule_length_mean = 0.0;
};

using RecordCallback = std::function<void(const ExplanationRecord&)>;

// Explains every test row against the fitted detector: score, rule, synthetic
// precision, coverage against the train set, validity, timings. Per-instance
// seeds derive from (seed, index) so single rows replay identically outside
// the batch. A failing instance is captured in its record, never fatal.
std::vector<ExplanationRecord> explain_test_set(const Dataset& train, const Dataset& test,
                                                const Detector& model, const Threshold& th,
                                                const DtorConfig& cfg, std::size_t n_gen,
                                                std::uint64_t seed,
                                                const RecordCallback& on_record = {});

// Means, population stds, max time and validity percentage over the non-error
// records. Throws if every record errored.
BenchmarkReport aggregate(const std::vector<ExplanationRecord>& records);

// Plain-text summary: one metric per line (exec time avg (max), precision and
// coverage with std, validity percent, mean rule length).
std::string format_report_table(const BenchmarkReport& report, const std::string& dataset_id,
                                const std::string& detector_id);

}  // namespace dtor
