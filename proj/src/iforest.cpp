#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "dtor/detect.hpp"
#include "dtor/rng.hpp"

namespace dtor {

double average_path_length_normalizer(std::size_t n) {
    if (n <= 1) return 0.0;
    double harmonic = 0.0;  // H(n-1), exact summation keeps small-n cases honest
    for (std::size_t i = 1; i < n; ++i) harmonic += 1.0 / static_cast<double>(i);
    const double nn = static_cast<double>(n);
    return 2.0 * harmonic - 2.0 * (nn - 1.0) / nn;
}

namespace {

struct IsoBuilder {
    const Matrix& X;
    Rng& rng;
    std::size_t height_limit;
    std::vector<IsoNode> nodes;

    int grow(std::vector<std::size_t>& idx, std::size_t depth) {
        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[id].size = static_cast<std::uint32_t>(idx.size());
        if (depth >= height_limit || idx.size() <= 1) return id;

        // features that still vary inside this node
        std::vector<std::size_t> splittable;
        for (std::size_t f = 0; f < X.n_cols; ++f) {
            double lo = X(idx[0], f), hi = lo;
            for (const std::size_t i : idx) {
                lo = std::min(lo, X(i, f));
                hi = std::max(hi, X(i, f));
            }
            if (lo < hi) splittable.push_back(f);
        }
        if (splittable.empty()) return id;

        const std::size_t f = splittable[rng.index(splittable.size())];
        double lo = X(idx[0], f), hi = lo;
        for (const std::size_t i : idx) {
            lo = std::min(lo, X(i, f));
            hi = std::max(hi, X(i, f));
        }
        double split = lo + rng.uniform() * (hi - lo);
        if (split <= lo) split = std::nextafter(lo, hi);  // keep both children nonempty

        std::vector<std::size_t> left_idx, right_idx;
        for (const std::size_t i : idx) {
            (X(i, f) < split ? left_idx : right_idx).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        nodes[id].feature = static_cast<int>(f);
        nodes[id].split = split;
        const int left = grow(left_idx, depth + 1);
        nodes[id].left = left;
        const int right = grow(right_idx, depth + 1);
        nodes[id].right = right;
        return id;
    }
};

}  // namespace

IsolationForest::IsolationForest(std::vector<std::vector<IsoNode>> trees,
                                 std::size_t n_features, std::size_t subsample,
                                 std::uint64_t seed)
    : trees_(std::move(trees)),
      n_features_(n_features),
      subsample_(subsample),
      seed_(seed),
      c_norm_(average_path_length_normalizer(subsample)) {}

IsolationForest fit_isolation_forest(const Dataset& train, const IsolationForestParams& params) {
    const std::size_t n = train.n_rows();
    if (n == 0) throw std::invalid_argument("fit_isolation_forest: empty dataset");
    if (params.n_trees == 0) throw std::invalid_argument("fit_isolation_forest: n_trees must be >= 1");

    const std::size_t psi = std::min(params.subsample, n);
    const std::size_t height_limit = psi > 1 ? std::bit_width(psi - 1) : 0;  // ceil(log2(psi))

    Rng rng(params.seed);
    std::vector<std::vector<IsoNode>> trees;
    trees.reserve(params.n_trees);
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        auto idx = rng.sample_without_replacement(n, psi);
        IsoBuilder builder{train.rows, rng, height_limit, {}};
        builder.grow(idx, 0);
        trees.push_back(std::move(builder.nodes));
    }
    return IsolationForest(std::move(trees), train.n_cols(), psi, params.seed);
}

double IsolationForest::path_length(const std::vector<IsoNode>& tree,
                                    std::span<const double> x) const {
    std::size_t at = 0;
    double depth = 0.0;
    while (tree[at].feature >= 0) {
        at = x[tree[at].feature] < tree[at].split ? tree[at].left : tree[at].right;
        depth += 1.0;
    }
    return depth + average_path_length_normalizer(tree[at].size);
}

std::vector<double> IsolationForest::score_rows(const Matrix& rows) const {
    if (rows.n_cols != n_features_)
        throw std::invalid_argument("score: row width does not match detector");
    std::vector<double> out(rows.n_rows);
    for (std::size_t i = 0; i < rows.n_rows; ++i) {
        if (c_norm_ <= 0.0) {
            out[i] = -1.0;  // degenerate subsample (psi <= 1): every point maximally isolated
            continue;
        }
        double total = 0.0;
        for (const auto& tree : trees_) total += path_length(tree, rows.row(i));
        const double avg_path = total / static_cast<double>(trees_.size());
        out[i] = -std::pow(2.0, -avg_path / c_norm_);
    }
    return out;
}

std::size_t IsolationForest::max_tree_depth() const {
    std::size_t deepest = 0;
    std::vector<std::size_t> depths;
    for (const auto& tree : trees_) {
        depths.assign(tree.size(), 0);
        for (std::size_t i = 0; i < tree.size(); ++i) {
            if (tree[i].feature < 0) continue;
            depths[tree[i].left] = depths[i] + 1;
            depths[tree[i].right] = depths[i] + 1;
            deepest = std::max(deepest, depths[i] + 1);
        }
    }
    return deepest;
}

nlohmann::ordered_json IsolationForest::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "iforest";
    j["n_features"] = n_features_;
    j["subsample"] = subsample_;
    j["seed"] = seed_;
    j["n_trees"] = trees_.size();
    // each node is [feature, split, left, right, size]; feature -1 marks a leaf
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const auto& tree : trees_) {
        nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
        for (const auto& node : tree)
            nodes.push_back({node.feature, node.split, node.left, node.right, node.size});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

IsolationForest IsolationForest::from_json(const nlohmann::json& j) {
    std::vector<std::vector<IsoNode>> trees;
    for (const auto& tj : j.at("trees")) {
        std::vector<IsoNode> tree;
        tree.reserve(tj.size());
        for (const auto& nj : tj) {
            IsoNode node;
            node.feature = nj.at(0).get<int>();
            node.split = nj.at(1).get<double>();
            node.left = nj.at(2).get<int>();
            node.right = nj.at(3).get<int>();
            node.size = nj.at(4).get<std::uint32_t>();
            tree.push_back(node);
        }
        trees.push_back(std::move(tree));
    }
    return IsolationForest(std::move(trees), j.at("n_features").get<std::size_t>(),
                           j.at("subsample").get<std::size_t>(),
                           j.at("seed").get<std::uint64_t>());
}

}  // namespace dtor
