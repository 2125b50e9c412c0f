#pragma once

#include <span>
#include <vector>

#include "dtor/matrix.hpp"
#include "dtor/rules.hpp"
#include "dtor/tree.hpp"

namespace dtor {

struct DtorConfig {
    // The explained instance is fitted with sample weight beta_factor * N.
    double beta_factor = 0.1;
    TreeParams tree_params;
};

struct Explanation {
    Rule rule;           // simplified decision path, carries the leaf value
    RegressionTree tree;
};

// Fits a weighted regression tree on the training rows plus the explained
// instance (unit weights plus beta for the instance) and returns the
// instance's decision path as a rule. The rule always holds on x_expl.
// y_expl must come from the same detector that scored y_train; this function
// never re-scores anything itself.
Explanation explain_instance(std::span<const double> x_expl, double y_expl,
                             const Matrix& X_train, std::span<const double> y_train,
                             const DtorConfig& cfg = {});

}  // namespace dtor
