#include "dtor/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dtor/rng.hpp"

namespace dtor {

namespace {

// predicates grouped per feature, ascending feature index
std::vector<std::pair<std::size_t, std::vector<Predicate>>> sub_rules(const Rule& rule) {
    std::map<std::size_t, std::vector<Predicate>> groups;
    for (const auto& p : rule.predicates) groups[p.feature].push_back(p);
    return {groups.begin(), groups.end()};
}

double interpolated_quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= sorted.size()) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ValueGrid build_value_grid(const Matrix& X, const Rule& rule,
                           const std::vector<FeatureMeta>& meta) {
    ValueGrid grid;
    for (const auto& [feature, preds] : sub_rules(rule)) {
        if (feature >= X.n_cols)
            throw std::invalid_argument("build_value_grid: rule feature out of range");

        // subset of X satisfying every predicate of this feature's sub-rule
        std::vector<double> cond;
        for (std::size_t i = 0; i < X.n_rows; ++i) {
            const double v = X(i, feature);
            bool ok = true;
            for (const auto& p : preds)
                ok = ok && (p.op == PredOp::LE ? v <= p.threshold : v > p.threshold);
            if (ok) cond.push_back(v);
        }
        if (cond.empty())
            throw std::invalid_argument(
                "build_value_grid: no row satisfies the sub-rule; X must include the "
                "explained instance");

        const bool categorical =
            feature < meta.size() && meta[feature].kind == FeatureKind::Categorical;
        if (categorical) {
            std::set<double> distinct(cond.begin(), cond.end());
            grid[feature] = {distinct.begin(), distinct.end()};
        } else {
            std::sort(cond.begin(), cond.end());
            const double mean =
                std::accumulate(cond.begin(), cond.end(), 0.0) / static_cast<double>(cond.size());
            grid[feature] = {cond.front(),
                             interpolated_quantile(cond, 0.25),
                             interpolated_quantile(cond, 0.5),
                             mean,
                             interpolated_quantile(cond, 0.75),
                             cond.back()};
        }
    }
    return grid;
}

std::vector<std::size_t> rank_candidates(const Matrix& X, const Rule& rule,
                                         std::uint64_t seed) {
    const auto groups = sub_rules(rule);
    std::vector<std::size_t> counts(X.n_rows, 0);
    for (std::size_t i = 0; i < X.n_rows; ++i) {
        const auto row = X.row(i);
        for (const auto& [feature, preds] : groups) {
            bool ok = true;
            for (const auto& p : preds) ok = ok && p.holds(row);
            counts[i] += ok;
        }
    }

    std::vector<std::size_t> matched;
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < X.n_rows; ++i) {
        (counts[i] > 0 ? matched : rest).push_back(i);
    }
    std::stable_sort(matched.begin(), matched.end(),
                     [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });

    Rng rng(seed);
    rng.shuffle(rest);
    matched.insert(matched.end(), rest.begin(), rest.end());
    return matched;
}

SynthSet generate_synthetic(const Matrix& X, const Rule& rule, const ValueGrid& grid,
                            std::size_t n_gen, std::uint64_t seed) {
    if (n_gen == 0) throw std::invalid_argument("generate_synthetic: n_gen must be >= 1");
    if (X.n_rows == 0) throw std::invalid_argument("generate_synthetic: empty X");

    const auto ranked = rank_candidates(X, rule, derive_seed(seed, 0));

    SynthSet out;
    out.rows = Matrix(n_gen, X.n_cols);
    out.provenance.resize(n_gen);
    for (std::size_t i = 0; i < n_gen; ++i) {
        const std::size_t src = ranked[i % ranked.size()];  // cycle when X is small
        out.provenance[i] = src;
        const auto row = X.row(src);
        std::copy(row.begin(), row.end(), out.rows.row(i).begin());
    }

    // overwrite every rule-feature column with draws from its grid; non-rule
    // columns keep the source rows' values, which is what retains correlation
    Rng rng(derive_seed(seed, 1));
    for (const auto& [feature, values] : grid) {
        for (std::size_t i = 0; i < n_gen; ++i)
            out.rows(i, feature) = values[rng.index(values.size())];
    }
    return out;
}

PrecisionEstimate estimate_precision_detailed(double y_expl, const Rule& rule,
                                              const Detector& model, const Threshold& th,
                                              const Matrix& X,
                                              const std::vector<FeatureMeta>& meta,
                                              std::size_t n_gen, std::uint64_t seed) {
    const Rule canon = simplify(rule);
    const ValueGrid grid = build_value_grid(X, canon, meta);

    PrecisionEstimate est;
    est.synth = generate_synthetic(X, canon, grid, n_gen, seed);
    est.synth_scores = score(model, est.synth.rows);
    est.outlier_direction = is_outlier(y_expl, th);

    std::size_t agree = 0;
    for (const double s : est.synth_scores) {
        const bool flagged = s < th.t;
        agree += (flagged == est.outlier_direction);
    }
    est.precision = static_cast<double>(agree) / static_cast<double>(est.synth_scores.size());
    return est;
}

double estimate_precision(double y_expl, const Rule& rule, const Detector& model,
                          const Threshold& th, const Matrix& X,
                          const std::vector<FeatureMeta>& meta, std::size_t n_gen,
                          std::uint64_t seed) {
    return estimate_precision_detailed(y_expl, rule, model, th, X, meta, n_gen, seed).precision;
}

}  // namespace dtor
