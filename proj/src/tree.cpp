#include "dtor/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dtor {

std::pair<double, double> weighted_moments(std::span<const double> y,
                                           std::span<const double> w) {
    if (y.empty() || y.size() != w.size())
        throw std::invalid_argument("weighted_moments: empty or mismatched input");
    double wsum = 0.0, ysum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(w[i] > 0.0)) throw std::invalid_argument("weighted_moments: non-positive weight");
        wsum += w[i];
        ysum += w[i] * y[i];
    }
    const double mean = ysum / wsum;
    double dev = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dlt = y[i] - mean;
        dev += w[i] * dlt * dlt;
    }
    return {mean, dev / wsum};
}

namespace {

constexpr double kPureVariance = 1e-12;

struct NodeStats {
    double wsum = 0.0;
    double mean = 0.0;
    double mse = 0.0;
};

// Two-pass moments over the node members, always in ascending row order so
// that candidates inducing the same partition get bit-identical statistics
// regardless of which feature produced them.
NodeStats stats_over(const std::vector<std::size_t>& idx, std::span<const double> y,
                     std::span<const double> w) {
    NodeStats s;
    double ysum = 0.0;
    for (const std::size_t i : idx) {
        s.wsum += w[i];
        ysum += w[i] * y[i];
    }
    s.mean = ysum / s.wsum;
    double dev = 0.0;
    for (const std::size_t i : idx) {
        const double dlt = y[i] - s.mean;
        dev += w[i] * dlt * dlt;
    }
    s.mse = dev / s.wsum;
    return s;
}

struct BestSplit {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double decrease = -std::numeric_limits<double>::infinity();
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const double> y, std::span<const double> w,
                const TreeParams& params)
        : X_(X), y_(y), w_(w), params_(params) {
        double wt = 0.0;
        for (const double wi : w) wt += wi;
        w_total_ = wt;
    }

    std::vector<TreeNode> build() {
        std::vector<std::size_t> all(X_.n_rows);
        std::iota(all.begin(), all.end(), 0);
        grow(all, 0);
        return std::move(nodes_);
    }

private:
    int grow(const std::vector<std::size_t>& idx, std::size_t depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        const NodeStats st = stats_over(idx, y_, w_);
        nodes_[id].value = st.mean;
        nodes_[id].weight = st.wsum;
        nodes_[id].n_samples = idx.size();

        if (depth >= params_.max_depth || st.mse < kPureVariance) return id;

        const BestSplit best = search_split(idx, st);
        if (!best.found) return id;

        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (const std::size_t i : idx) {
            (X_(i, best.feature) <= best.threshold ? left_idx : right_idx).push_back(i);
        }

        nodes_[id].feature = static_cast<int>(best.feature);
        nodes_[id].threshold = best.threshold;
        const int left = grow(left_idx, depth + 1);
        nodes_[id].left = left;
        const int right = grow(right_idx, depth + 1);
        nodes_[id].right = right;
        return id;
    }

    BestSplit search_split(const std::vector<std::size_t>& idx, const NodeStats& node) {
        BestSplit best;
        std::vector<double> vals;
        vals.reserve(idx.size());
        for (std::size_t f = 0; f < X_.n_cols; ++f) {
            vals.clear();
            for (const std::size_t i : idx) vals.push_back(X_(i, f));
            std::sort(vals.begin(), vals.end());
            vals.erase(std::unique(vals.begin(), vals.end()), vals.end());

            for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
                double thr = std::midpoint(vals[v], vals[v + 1]);
                // adjacent representable values can round the midpoint up to
                // the right value; fall back so the threshold still separates
                if (thr >= vals[v + 1]) thr = vals[v];

                double wl = 0.0, wr = 0.0, ysl = 0.0, ysr = 0.0;
                std::size_t nl = 0, nr = 0;
                for (const std::size_t i : idx) {
                    if (X_(i, f) <= thr) {
                        wl += w_[i];
                        ysl += w_[i] * y_[i];
                        ++nl;
                    } else {
                        wr += w_[i];
                        ysr += w_[i] * y_[i];
                        ++nr;
                    }
                }
                if (nl < params_.min_samples_leaf || nr < params_.min_samples_leaf) continue;

                const double ml = ysl / wl;
                const double mr = ysr / wr;
                double devl = 0.0, devr = 0.0;
                for (const std::size_t i : idx) {
                    if (X_(i, f) <= thr) {
                        const double dlt = y_[i] - ml;
                        devl += w_[i] * dlt * dlt;
                    } else {
                        const double dlt = y_[i] - mr;
                        devr += w_[i] * dlt * dlt;
                    }
                }
                const double mse_l = devl / wl;
                const double mse_r = devr / wr;
                const double decrease =
                    (node.wsum / w_total_) *
                    (node.mse - (wl / node.wsum) * mse_l - (wr / node.wsum) * mse_r);

                if (decrease >= params_.min_impurity_decrease && decrease > best.decrease) {
                    best.found = true;
                    best.feature = f;
                    best.threshold = thr;
                    best.decrease = decrease;
                }
            }
        }
        return best;
    }

    const Matrix& X_;
    std::span<const double> y_;
    std::span<const double> w_;
    const TreeParams& params_;
    double w_total_ = 0.0;
    std::vector<TreeNode> nodes_;
};

}  // namespace

RegressionTree fit_tree(const Matrix& X, std::span<const double> y,
                        std::span<const double> w, const TreeParams& params) {
    if (X.n_rows == 0 || X.n_cols == 0) throw std::invalid_argument("fit_tree: empty matrix");
    if (y.size() != X.n_rows || w.size() != X.n_rows)
        throw std::invalid_argument("fit_tree: X, y, w length mismatch");
    for (const double wi : w)
        if (!(wi > 0.0)) throw std::invalid_argument("fit_tree: weights must be positive");

    TreeBuilder builder(X, y, w, params);
    return RegressionTree(builder.build(), X.n_cols);
}

std::size_t RegressionTree::n_leaves() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) n += node.is_leaf();
    return n;
}

std::size_t RegressionTree::depth() const {
    // depth of node i computed iteratively from the root
    std::vector<std::size_t> depths(nodes_.size(), 0);
    std::size_t max_depth = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].is_leaf()) continue;
        depths[nodes_[i].left] = depths[i] + 1;
        depths[nodes_[i].right] = depths[i] + 1;
        max_depth = std::max(max_depth, depths[i] + 1);
    }
    return max_depth;
}

std::size_t RegressionTree::leaf_index(std::span<const double> x) const {
    if (x.size() != n_features_)
        throw std::invalid_argument("predict: row width does not match training width");
    std::size_t at = 0;
    while (!nodes_[at].is_leaf()) {
        const TreeNode& node = nodes_[at];
        at = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return at;
}

double RegressionTree::predict(std::span<const double> x) const {
    return nodes_[leaf_index(x)].value;
}

std::vector<PathStep> RegressionTree::decision_path(std::span<const double> x) const {
    if (x.size() != n_features_)
        throw std::invalid_argument("decision_path: row width does not match training width");
    std::vector<PathStep> path;
    std::size_t at = 0;
    while (!nodes_[at].is_leaf()) {
        const TreeNode& node = nodes_[at];
        const bool goes_left = x[node.feature] <= node.threshold;
        path.push_back({static_cast<std::size_t>(node.feature),
                        goes_left ? Dir::LE : Dir::GT, node.threshold});
        at = goes_left ? node.left : node.right;
    }
    return path;
}

}  // namespace dtor
