#include "dtor/tree.hpp"

#include <cmath>

#include "doctest.h"
#include "dtor/rng.hpp"
#include "support/oracle_cart.hpp"

using namespace dtor;

namespace {

Matrix column_matrix(const std::vector<double>& v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
    return m;
}

bool trees_equal(const RegressionTree& tree, const oracle::Node& ref, int at = 0,
                 double value_tol = 0.0) {
    const TreeNode& node = tree.nodes()[at];
    if (node.is_leaf() != ref.leaf) return false;
    if (node.is_leaf()) {
        if (node.n_samples != ref.n) return false;
        if (value_tol == 0.0) return node.value == ref.value;
        return std::abs(node.value - ref.value) <=
               value_tol * std::max(1.0, std::abs(ref.value));
    }
    if (static_cast<std::size_t>(node.feature) != ref.feature) return false;
    if (node.threshold != ref.threshold) return false;
    return trees_equal(tree, *ref.left, node.left, value_tol) &&
           trees_equal(tree, *ref.right, node.right, value_tol);
}

}  // namespace

TEST_CASE("weighted moments: unit weights") {
    const std::vector<double> y{1, 3}, w{1, 1};
    const auto [mean, mse] = weighted_moments(y, w);
    CHECK(mean == 2.0);
    CHECK(mse == 1.0);
}

TEST_CASE("weighted moments: skewed weights against the second formula") {
    const std::vector<double> y{0, 10}, w{9, 1};
    const auto [mean, mse] = weighted_moments(y, w);
    CHECK(mean == doctest::Approx(1.0));
    CHECK(mse == doctest::Approx(9.0));
    // independent route: E[y^2] - mean^2
    double ws = 0, yy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ws += w[i];
        yy += w[i] * y[i] * y[i];
    }
    CHECK(mse == doctest::Approx(yy / ws - mean * mean));
}

TEST_CASE("weighted moments: integer weights equal replication") {
    const std::vector<double> y{0.37, 2.81}, w{2, 2};
    const auto [mean, mse] = weighted_moments(y, w);
    const std::vector<double> yr{0.37, 0.37, 2.81, 2.81}, wr{1, 1, 1, 1};
    const auto [mean_r, mse_r] = weighted_moments(yr, wr);
    CHECK(mean == doctest::Approx(mean_r).epsilon(1e-12));
    CHECK(mse == doctest::Approx(mse_r).epsilon(1e-12));
}

TEST_CASE("weighted moments: rejects bad input") {
    CHECK_THROWS(weighted_moments(std::vector<double>{}, std::vector<double>{}));
    CHECK_THROWS(weighted_moments(std::vector<double>{1.0}, std::vector<double>{0.0}));
    CHECK_THROWS(weighted_moments(std::vector<double>{1.0}, std::vector<double>{-1.0}));
}

TEST_CASE("fit_tree: constant targets give a single leaf") {
    const Matrix X = column_matrix({1, 2, 3});
    const std::vector<double> y{3, 3, 3}, w{1, 1, 1};
    const auto tree = fit_tree(X, y, w);
    CHECK(tree.nodes().size() == 1);
    CHECK(tree.root().is_leaf());
    CHECK(tree.root().value == 3.0);
    CHECK(tree.root().n_samples == 3);
}

TEST_CASE("fit_tree: step targets split at the verified best midpoint") {
    // brute force over the 3 midpoints puts the largest decrease at 1.5
    const Matrix X = column_matrix({0, 1, 2, 3});
    const std::vector<double> y{0, 0, 10, 10}, w{1, 1, 1, 1};
    const auto tree = fit_tree(X, y, w);

    REQUIRE(!tree.root().is_leaf());
    CHECK(tree.root().feature == 0);
    CHECK(tree.root().threshold == 1.5);
    const auto& left = tree.nodes()[tree.root().left];
    const auto& right = tree.nodes()[tree.root().right];
    CHECK(left.is_leaf());
    CHECK(right.is_leaf());
    CHECK(left.value == 0.0);
    CHECK(right.value == 10.0);

    CHECK(tree.predict(std::vector<double>{2.0}) == 10.0);
    // boundary routes left
    CHECK(tree.predict(std::vector<double>{1.5}) == 0.0);

    const auto path = tree.decision_path(std::vector<double>{2.0});
    REQUIRE(path.size() == 1);
    CHECK(path[0].feature == 0);
    CHECK(path[0].direction == Dir::GT);
    CHECK(path[0].threshold == 1.5);
}

TEST_CASE("fit_tree: single-leaf tree predicts its value and has an empty path") {
    const Matrix X = column_matrix({5});
    const auto tree = fit_tree(X, std::vector<double>{7}, std::vector<double>{1});
    CHECK(tree.predict(std::vector<double>{123.0}) == 7.0);
    CHECK(tree.decision_path(std::vector<double>{123.0}).empty());
}

TEST_CASE("fit_tree: input validation") {
    const Matrix X = column_matrix({1, 2});
    CHECK_THROWS(fit_tree(X, std::vector<double>{1}, std::vector<double>{1, 1}));
    CHECK_THROWS(fit_tree(X, std::vector<double>{1, 2}, std::vector<double>{1, 0}));
    const auto tree = fit_tree(X, std::vector<double>{1, 2}, std::vector<double>{1, 1});
    CHECK_THROWS(tree.predict(std::vector<double>{1.0, 2.0}));
    CHECK_THROWS(tree.decision_path(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("fit_tree: matches the brute-force oracle on random instances") {
    Rng rng(20240);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + rng.index(11);
        const std::size_t d = 1 + rng.index(3);
        Matrix X(n, d);
        std::vector<double> y(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.uniform(0, 10);
            y[i] = rng.uniform(0, 1);
            w[i] = rng.uniform(0.5, 2.0);
        }
        TreeParams params;
        params.max_depth = 1 + rng.index(4);
        const auto tree = fit_tree(X, y, w, params);
        const auto ref = oracle::fit(X, y, w, {params.max_depth, params.min_impurity_decrease,
                                               params.min_samples_leaf});
        CHECK(trees_equal(tree, *ref));
    }
}

TEST_CASE("fit_tree: depth bound and path consistency on training rows") {
    Rng rng(555);
    const std::size_t n = 200, d = 4;
    Matrix X(n, d);
    std::vector<double> y(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.uniform(-5, 5);
        y[i] = std::sin(X(i, 0)) + 0.2 * rng.normal();
    }
    TreeParams params;
    params.max_depth = 5;
    const auto tree = fit_tree(X, y, w, params);
    CHECK(tree.depth() <= 5);

    for (std::size_t i = 0; i < n; ++i) {
        const auto x = X.row(i);
        const auto path = tree.decision_path(x);
        CHECK(path.size() <= params.max_depth);
        for (const auto& step : path) {
            const bool holds = step.direction == Dir::LE ? x[step.feature] <= step.threshold
                                                         : x[step.feature] > step.threshold;
            CHECK(holds);
        }
    }
}

TEST_CASE("fit_tree: every accepted split decreases impurity by the configured minimum") {
    Rng rng(77);
    const std::size_t n = 64;
    Matrix X(n, 2);
    std::vector<double> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
        X(i, 0) = rng.uniform(0, 1);
        X(i, 1) = rng.uniform(0, 1);
        y[i] = rng.uniform(0, 1);
        w[i] = rng.uniform(0.5, 1.5);
    }
    TreeParams params;
    params.min_impurity_decrease = 1e-3;
    const auto tree = fit_tree(X, y, w, params);

    double w_total = 0.0;
    for (const double wi : w) w_total += wi;

    // every row belongs to each node on its root-to-leaf path
    std::vector<std::vector<std::size_t>> members(tree.nodes().size());
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t at = 0;
        members[at].push_back(i);
        while (!tree.nodes()[at].is_leaf()) {
            const auto& cur = tree.nodes()[at];
            at = X(i, cur.feature) <= cur.threshold ? cur.left : cur.right;
            members[at].push_back(i);
        }
    }

    const auto moments_of = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> ys, ws;
        for (const std::size_t i : idx) {
            ys.push_back(y[i]);
            ws.push_back(w[i]);
        }
        return weighted_moments(ys, ws);
    };

    for (std::size_t id = 0; id < tree.nodes().size(); ++id) {
        const auto& node = tree.nodes()[id];
        REQUIRE(members[id].size() == node.n_samples);
        const auto [mean, mse] = moments_of(members[id]);
        CHECK(mean == doctest::Approx(node.value).epsilon(1e-9));
        if (node.is_leaf()) continue;

        const auto& lhs = tree.nodes()[node.left];
        const auto& rhs = tree.nodes()[node.right];
        const auto [ml, msel] = moments_of(members[node.left]);
        const auto [mr, mser] = moments_of(members[node.right]);
        const double decrease =
            (node.weight / w_total) *
            (mse - (lhs.weight / node.weight) * msel - (rhs.weight / node.weight) * mser);
        CHECK(decrease >= params.min_impurity_decrease - 1e-12);
    }
}

TEST_CASE("fit_tree: weight replication equivalence on integer weights") {
    Rng rng(909);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 3 + rng.index(8);
        const std::size_t d = 1 + rng.index(2);
        Matrix X(n, d);
        std::vector<double> y(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) X(i, j) = rng.uniform(0, 4);
            y[i] = rng.uniform(0, 1);
            w[i] = double(1 + rng.index(5));
        }
        Matrix Xr(0, d);
        std::vector<double> yr, wr;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t rep = 0; rep < std::size_t(w[i]); ++rep) {
                Xr.append_row(X.row(i));
                yr.push_back(y[i]);
                wr.push_back(1.0);
            }
        TreeParams params;
        params.max_depth = 3;
        const auto weighted = fit_tree(X, y, w, params);
        const auto replicated = fit_tree(Xr, yr, wr, params);

        // structure and thresholds must agree; values to fp accumulation noise
        REQUIRE(weighted.nodes().size() == replicated.nodes().size());
        for (std::size_t i = 0; i < weighted.nodes().size(); ++i) {
            const auto& a = weighted.nodes()[i];
            const auto& b = replicated.nodes()[i];
            CHECK(a.feature == b.feature);
            if (!a.is_leaf()) CHECK(a.threshold == b.threshold);
            CHECK(a.value == doctest::Approx(b.value).epsilon(1e-12));
            CHECK(a.weight == doctest::Approx(b.weight).epsilon(1e-12));
        }
    }
}
