#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "dtor/dataset.hpp"
#include "dtor/detect.hpp"
#include "dtor/matrix.hpp"
#include "dtor/rules.hpp"

namespace dtor {

// Admissible values per rule feature. Numeric features carry exactly the six
// entries [min, q1/4, q1/2, mean, q3/4, max] of the conditioned subset
// (duplicates kept); categorical features carry the distinct codes observed
// there. Every grid value satisfies the rule's predicates on its feature.
using ValueGrid = std::map<std::size_t, std::vector<double>>;

struct SynthSet {
    Matrix rows;
    std::vector<std::size_t> provenance;  // source row in X per synthetic row
};

// X is expected to contain the explained instance, which guarantees each
// per-feature conditioned subset is nonempty. The rule must be simplified.
ValueGrid build_value_grid(const Matrix& X, const Rule& rule,
                           const std::vector<FeatureMeta>& meta);

// Rows satisfying at least one per-feature sub-rule, ordered by descending
// count of satisfied sub-rules (ties by ascending row index), followed by the
// remaining rows in seeded-random order.
std::vector<std::size_t> rank_candidates(const Matrix& X, const Rule& rule,
                                         std::uint64_t seed);

// Base rows are the first n_gen ranked candidates (cycling when X is small);
// every rule-feature column is then overwritten with uniform draws from the
// grid, so each synthetic row satisfies the rule while non-rule columns keep
// their source-row values.
SynthSet generate_synthetic(const Matrix& X, const Rule& rule, const ValueGrid& grid,
                            std::size_t n_gen, std::uint64_t seed);

struct PrecisionEstimate {
    double precision = 0.0;
    bool outlier_direction = false;  // y_expl < t
    SynthSet synth;
    std::vector<double> synth_scores;
};

// Scores the synthetic neighborhood with the detector and returns the
// fraction that agrees with the explained instance's side of the threshold:
// mean(score < t) when y_expl < t, mean(score >= t) otherwise.
PrecisionEstimate estimate_precision_detailed(double y_expl, const Rule& rule,
                                              const Detector& model, const Threshold& th,
                                              const Matrix& X,
                                              const std::vector<FeatureMeta>& meta,
                                              std::size_t n_gen, std::uint64_t seed);

double estimate_precision(double y_expl, const Rule& rule, const Detector& model,
                          const Threshold& th, const Matrix& X,
                          const std::vector<FeatureMeta>& meta, std::size_t n_gen,
                          std::uint64_t seed);

}  // namespace dtor
