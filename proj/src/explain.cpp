#include "dtor/explain.hpp"

#include <stdexcept>

namespace dtor {

Explanation explain_instance(std::span<const double> x_expl, double y_expl,
                             const Matrix& X_train, std::span<const double> y_train,
                             const DtorConfig& cfg) {
    const std::size_t n = X_train.n_rows;
    if (n == 0) throw std::invalid_argument("explain_instance: empty training set");
    if (x_expl.size() != X_train.n_cols)
        throw std::invalid_argument("explain_instance: instance width does not match training set");
    if (y_train.size() != n)
        throw std::invalid_argument("explain_instance: y_train length mismatch");
    if (!(cfg.beta_factor > 0.0))
        throw std::invalid_argument("explain_instance: beta_factor must be positive");

    // the instance joins the training set with weight beta = beta_factor * N;
    // appending even when x_expl already occurs just adds weight to that point
    Matrix X = X_train;
    X.append_row(x_expl);
    std::vector<double> y(y_train.begin(), y_train.end());
    y.push_back(y_expl);
    std::vector<double> w(n, 1.0);
    w.push_back(cfg.beta_factor * static_cast<double>(n));

    Explanation out;
    out.tree = fit_tree(X, y, w, cfg.tree_params);
    const auto path = out.tree.decision_path(x_expl);
    out.rule = simplify(rule_from_path(path, out.tree.predict(x_expl)));
    return out;
}

}  // namespace dtor
