#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dtor/dataset.hpp"
#include "dtor/matrix.hpp"

#include "json.hpp"

namespace dtor {

// Score orientation is fixed library-wide: lower = more anomalous.

struct Threshold {
    double t = 0.0;
    double contamination = 0.05;
};

class Detector {
public:
    virtual ~Detector() = default;
    virtual std::size_t n_features() const = 0;
    virtual std::vector<double> score_rows(const Matrix& rows) const = 0;
    virtual std::string kind() const = 0;
    virtual nlohmann::ordered_json to_json() const = 0;
};

// Width-checked scoring front door; also rejects non-finite scores.
std::vector<double> score(const Detector& model, const Matrix& rows);

// t is the empirical contamination-quantile (lower interpolation) of the
// training scores; the outlier decision is score < t, strict.
Threshold threshold_from_contamination(const std::vector<double>& train_scores,
                                       double contamination = 0.05);

bool is_outlier(double s, const Threshold& th);

// ---------------------------------------------------------------- iforest

struct IsolationForestParams {
    std::size_t n_trees = 100;
    std::size_t subsample = 256;  // capped at the training size
    std::uint64_t seed = 42;
};

struct IsoNode {
    int feature = -1;  // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    std::uint32_t size = 0;  // rows reaching the node during fitting
};

// Ensemble of random-partition trees. Exposed score is -2^(-E[h(x)]/c(psi)),
// in [-1, 0]; psi is the actual subsample size and c the average-path-length
// normalizer (c(n) = 2 H(n-1) - 2 (n-1)/n, c(n <= 1) = 0).
class IsolationForest final : public Detector {
public:
    IsolationForest(std::vector<std::vector<IsoNode>> trees, std::size_t n_features,
                    std::size_t subsample, std::uint64_t seed);

    std::size_t n_features() const override { return n_features_; }
    std::vector<double> score_rows(const Matrix& rows) const override;
    std::string kind() const override { return "iforest"; }
    nlohmann::ordered_json to_json() const override;
    static IsolationForest from_json(const nlohmann::json& j);

    const std::vector<std::vector<IsoNode>>& trees() const { return trees_; }
    std::size_t subsample() const { return subsample_; }
    double normalizer() const { return c_norm_; }
    std::size_t max_tree_depth() const;

private:
    double path_length(const std::vector<IsoNode>& tree, std::span<const double> x) const;

    std::vector<std::vector<IsoNode>> trees_;
    std::size_t n_features_ = 0;
    std::size_t subsample_ = 0;
    std::uint64_t seed_ = 0;
    double c_norm_ = 0.0;
};

double average_path_length_normalizer(std::size_t n);

IsolationForest fit_isolation_forest(const Dataset& train,
                                     const IsolationForestParams& params = {});

// ---------------------------------------------------------------- gmm

struct GmmParams {
    std::size_t k = 4;
    std::uint64_t seed = 42;
    double reg = 1e-6;       // diagonal covariance floor
    std::size_t max_iter = 200;
    double tol = 1e-4;       // on the mean per-sample log-likelihood
};

// Diagonal-covariance Gaussian mixture fitted by EM on internally
// standardized data. Exposed score is the mixture log-density of the
// standardized row, so low density means low (more anomalous) score.
class GaussianMixture final : public Detector {
public:
    GaussianMixture(std::size_t k, std::vector<double> weights, Matrix means,
                    Matrix variances, Standardizer standardizer, GmmParams params,
                    std::vector<double> ll_trace = {});

    std::size_t n_features() const override { return means_.n_cols; }
    std::vector<double> score_rows(const Matrix& rows) const override;
    std::string kind() const override { return "gmm"; }
    nlohmann::ordered_json to_json() const override;
    static GaussianMixture from_json(const nlohmann::json& j);

    std::size_t k() const { return k_; }
    const std::vector<double>& weights() const { return weights_; }
    const Matrix& means() const { return means_; }
    const Matrix& variances() const { return variances_; }
    const Standardizer& standardizer() const { return standardizer_; }
    // Mean per-sample log-likelihood after each EM iteration.
    const std::vector<double>& log_likelihood_trace() const { return ll_trace_; }

private:
    double log_density(std::span<const double> standardized) const;

    std::size_t k_ = 0;
    std::vector<double> weights_;
    Matrix means_;      // k x d
    Matrix variances_;  // k x d, diagonal covariances
    Standardizer standardizer_;
    GmmParams params_;
    std::vector<double> ll_trace_;
};

GaussianMixture fit_gmm(const Dataset& train, const GmmParams& params = {});

// ---------------------------------------------------------------- external

// Adapter for out-of-process scorers. Rows go to the child's stdin as
// header-less comma-separated values, one row per line; the child must print
// exactly one score per input line on stdout (lower = more anomalous).
class ExternalScorer final : public Detector {
public:
    ExternalScorer(std::string command, std::size_t n_features);

    std::size_t n_features() const override { return n_features_; }
    std::vector<double> score_rows(const Matrix& rows) const override;
    std::string kind() const override { return "external"; }
    nlohmann::ordered_json to_json() const override;
    static ExternalScorer from_json(const nlohmann::json& j);

    const std::string& command() const { return command_; }

private:
    std::string command_;
    std::size_t n_features_ = 0;
};

std::unique_ptr<Detector> detector_from_json(const nlohmann::json& j);

}  // namespace dtor
