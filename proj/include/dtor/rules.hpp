#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dtor/dataset.hpp"
#include "dtor/tree.hpp"

namespace dtor {

enum class PredOp { LE, GT };

struct Predicate {
    std::size_t feature;
    PredOp op;
    double threshold;

    bool holds(std::span<const double> z) const {
        return op == PredOp::LE ? z[feature] <= threshold : z[feature] > threshold;
    }
};

// Conjunction of threshold predicates. An empty predicate list is the
// always-true rule. leaf_value, when present, is the anomaly score predicted
// by the decision-path leaf the rule came from.
struct Rule {
    std::vector<Predicate> predicates;
    std::optional<double> leaf_value;

    std::size_t length() const { return predicates.size(); }
    bool empty() const { return predicates.empty(); }
};

Rule rule_from_path(const std::vector<PathStep>& path,
                    std::optional<double> leaf_value = std::nullopt);

// 1 iff every predicate holds on z (LE inclusive, GT strict).
bool satisfies(const Rule& rule, std::span<const double> z);

// Intersects repeated per-feature intervals: keeps the max GT and the min LE
// threshold per feature. Output order is ascending feature index with GT
// before LE. Throws if some feature's interval is empty (cannot happen for
// rules extracted from a decision path).
Rule simplify(const Rule& rule);

// Fraction of dataset rows satisfying the rule.
double coverage(const Rule& rule, const Dataset& ds);

int validity(const Rule& rule, std::span<const double> x);

// "name > 2 AND name2 <= 1.5"; thresholds in shortest round-trip decimal;
// the empty rule renders as "TRUE". Features beyond meta (or with an empty
// meta list) are named feature_<index>.
std::string render(const Rule& rule, const std::vector<FeatureMeta>& meta = {});

// Like render, but categorical predicates are shown as the matching code set,
// e.g. "color in {0,1}". Display only; not parseable.
std::string render_annotated(const Rule& rule, const std::vector<FeatureMeta>& meta);

// Inverse of render for the canonical threshold form.
Rule parse_rule(const std::string& text, const std::vector<FeatureMeta>& meta = {});

}  // namespace dtor
