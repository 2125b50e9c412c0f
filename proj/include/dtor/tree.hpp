#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dtor/matrix.hpp"

namespace dtor {

struct TreeParams {
    std::size_t max_depth = 8;
    double min_impurity_decrease = 1e-5;
    std::size_t min_samples_leaf = 1;
};

// Internal nodes route x[feature] <= threshold to the left child and
// x[feature] > threshold to the right child; the same convention is used by
// fitting, prediction, path extraction and rule satisfaction.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // weighted mean of the node's targets
    double weight = 0.0;
    std::size_t n_samples = 0;

    bool is_leaf() const { return feature < 0; }
};

enum class Dir { LE, GT };

struct PathStep {
    std::size_t feature;
    Dir direction;
    double threshold;
};

class RegressionTree {
public:
    RegressionTree() = default;
    RegressionTree(std::vector<TreeNode> nodes, std::size_t n_features)
        : nodes_(std::move(nodes)), n_features_(n_features) {}

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    const TreeNode& root() const { return nodes_.front(); }
    std::size_t n_features() const { return n_features_; }
    std::size_t n_leaves() const;
    std::size_t depth() const;

    double predict(std::span<const double> x) const;
    std::vector<PathStep> decision_path(std::span<const double> x) const;

private:
    std::size_t leaf_index(std::span<const double> x) const;

    std::vector<TreeNode> nodes_;  // nodes_[0] is the root
    std::size_t n_features_ = 0;
};

// Exact greedy CART on weighted mean-squared-error impurity. At every node
// all features and all midpoints between consecutive distinct sorted values
// are searched; a split is kept iff its weighted impurity decrease
//   (W_node / W_total) * (mse_node - (W_L/W_node) mse_L - (W_R/W_node) mse_R)
// reaches params.min_impurity_decrease and both children have at least
// min_samples_leaf rows. Ties break toward the lower feature index, then the
// lower threshold.
RegressionTree fit_tree(const Matrix& X, std::span<const double> y,
                        std::span<const double> w, const TreeParams& params = {});

// (weighted mean, weighted mean squared deviation)
std::pair<double, double> weighted_moments(std::span<const double> y,
                                           std::span<const double> w);

}  // namespace dtor
