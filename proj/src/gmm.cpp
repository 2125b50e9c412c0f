#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "dtor/detect.hpp"
#include "dtor/json_io.hpp"
#include "dtor/rng.hpp"

namespace dtor {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
constexpr double kTinyResponsibility = 1e-10;

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

// k-means++ style seeding on the standardized rows
std::vector<std::size_t> seed_centers(const Matrix& X, std::size_t k, Rng& rng) {
    std::vector<std::size_t> centers;
    centers.push_back(rng.index(X.n_rows));
    std::vector<double> dist2(X.n_rows, std::numeric_limits<double>::infinity());
    while (centers.size() < k) {
        const auto last = X.row(centers.back());
        double total = 0.0;
        for (std::size_t i = 0; i < X.n_rows; ++i) {
            dist2[i] = std::min(dist2[i], squared_distance(X.row(i), last));
            total += dist2[i];
        }
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.index(X.n_rows);
        } else {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = X.n_rows - 1;
            for (std::size_t i = 0; i < X.n_rows; ++i) {
                acc += dist2[i];
                if (acc >= target) {
                    pick = i;
                    break;
                }
            }
        }
        centers.push_back(pick);
    }
    return centers;
}

double log_gaussian_diag(std::span<const double> x, std::span<const double> mean,
                         std::span<const double> var) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - mean[j];
        acc += std::log(var[j]) + d * d / var[j];
    }
    return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + acc);
}

}  // namespace

GaussianMixture::GaussianMixture(std::size_t k, std::vector<double> weights, Matrix means,
                                 Matrix variances, Standardizer standardizer,
                                 GmmParams params, std::vector<double> ll_trace)
    : k_(k),
      weights_(std::move(weights)),
      means_(std::move(means)),
      variances_(std::move(variances)),
      standardizer_(std::move(standardizer)),
      params_(params),
      ll_trace_(std::move(ll_trace)) {}

GaussianMixture fit_gmm(const Dataset& train, const GmmParams& params) {
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_cols();
    const std::size_t k = params.k;
    if (k == 0) throw std::invalid_argument("fit_gmm: k must be >= 1");
    if (n < k) throw std::invalid_argument("fit_gmm: fewer rows than components");

    Standardizer standardizer = fit_standardizer(train);
    const Matrix X = standardizer.transform(train.rows);

    Rng rng(params.seed);
    const auto center_rows = seed_centers(X, k, rng);

    Matrix means(k, d);
    Matrix vars(k, d, 1.0);
    std::vector<double> weights(k, 1.0 / static_cast<double>(k));

    // hard assignment to the nearest seeded center gives the initial moments
    {
        std::vector<std::size_t> assign(n);
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d2 = squared_distance(X.row(i), X.row(center_rows[c]));
                if (d2 < best) {
                    best = d2;
                    assign[i] = c;
                }
            }
        }
        std::vector<double> counts(k, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            counts[assign[i]] += 1.0;
            for (std::size_t j = 0; j < d; ++j) means(assign[i], j) += X(i, j);
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0.0) {
                for (std::size_t j = 0; j < d; ++j) means(c, j) /= counts[c];
            } else {
                for (std::size_t j = 0; j < d; ++j) means(c, j) = X(center_rows[c], j);
            }
        }
        Matrix dev(k, d);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) {
                const double dlt = X(i, j) - means(assign[i], j);
                dev(assign[i], j) += dlt * dlt;
            }
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < d; ++j) {
                const double raw = counts[c] > 0.0 ? dev(c, j) / counts[c] : 1.0;
                vars(c, j) = std::max(raw, params.reg);
            }
        for (std::size_t c = 0; c < k; ++c)
            weights[c] = std::max(counts[c], kTinyResponsibility) / static_cast<double>(n);
        double wsum = 0.0;
        for (const double w : weights) wsum += w;
        for (double& w : weights) w /= wsum;
    }

    std::vector<double> ll_trace;
    Matrix resp(n, k);
    std::vector<double> log_w(k);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0; iter < params.max_iter; ++iter) {
        // E step
        for (std::size_t c = 0; c < k; ++c) log_w[c] = std::log(std::max(weights[c], 1e-300));
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row_max = -std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double lp = log_w[c] + log_gaussian_diag(X.row(i), means.row(c), vars.row(c));
                resp(i, c) = lp;
                row_max = std::max(row_max, lp);
            }
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) sum += std::exp(resp(i, c) - row_max);
            const double lse = row_max + std::log(sum);
            ll += lse;
            for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(resp(i, c) - lse);
        }
        const double mean_ll = ll / static_cast<double>(n);
        ll_trace.push_back(mean_ll);

        // M step
        for (std::size_t c = 0; c < k; ++c) {
            double nk = 0.0;
            for (std::size_t i = 0; i < n; ++i) nk += resp(i, c);
            weights[c] = nk / static_cast<double>(n);
            if (nk < kTinyResponsibility) {
                // collapsed component: keep its previous location, floor the scale
                for (std::size_t j = 0; j < d; ++j) vars(c, j) = std::max(vars(c, j), params.reg);
                continue;
            }
            for (std::size_t j = 0; j < d; ++j) {
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i) m += resp(i, c) * X(i, j);
                means(c, j) = m / nk;
            }
            for (std::size_t j = 0; j < d; ++j) {
                double v = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double dlt = X(i, j) - means(c, j);
                    v += resp(i, c) * dlt * dlt;
                }
                vars(c, j) = std::max(v / nk, params.reg);
            }
        }
        double wsum = 0.0;
        for (const double w : weights) wsum += w;
        for (double& w : weights) w /= wsum;

        if (std::abs(mean_ll - prev_ll) < params.tol) break;
        prev_ll = mean_ll;
    }

    return GaussianMixture(k, std::move(weights), std::move(means), std::move(vars),
                           std::move(standardizer), params, std::move(ll_trace));
}

double GaussianMixture::log_density(std::span<const double> z) const {
    double row_max = -std::numeric_limits<double>::infinity();
    std::vector<double> lp(k_);
    for (std::size_t c = 0; c < k_; ++c) {
        lp[c] = std::log(std::max(weights_[c], 1e-300)) +
                log_gaussian_diag(z, means_.row(c), variances_.row(c));
        row_max = std::max(row_max, lp[c]);
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k_; ++c) sum += std::exp(lp[c] - row_max);
    return row_max + std::log(sum);
}

std::vector<double> GaussianMixture::score_rows(const Matrix& rows) const {
    if (rows.n_cols != n_features())
        throw std::invalid_argument("score: row width does not match detector");
    std::vector<double> out(rows.n_rows);
    std::vector<double> z(rows.n_cols);
    for (std::size_t i = 0; i < rows.n_rows; ++i) {
        standardizer_.transform_row(rows.row(i), z);
        out[i] = log_density(z);
    }
    return out;
}

nlohmann::ordered_json GaussianMixture::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "gmm";
    j["n_features"] = means_.n_cols;
    j["k"] = k_;
    j["seed"] = params_.seed;
    j["reg"] = params_.reg;
    j["weights"] = weights_;
    nlohmann::ordered_json means = nlohmann::ordered_json::array();
    nlohmann::ordered_json vars = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < k_; ++c) {
        means.push_back(std::vector<double>(means_.row(c).begin(), means_.row(c).end()));
        vars.push_back(std::vector<double>(variances_.row(c).begin(), variances_.row(c).end()));
    }
    j["means"] = std::move(means);
    j["variances"] = std::move(vars);
    j["standardizer"] = standardizer_to_json(standardizer_);
    return j;
}

GaussianMixture GaussianMixture::from_json(const nlohmann::json& j) {
    const std::size_t k = j.at("k").get<std::size_t>();
    const std::size_t d = j.at("n_features").get<std::size_t>();
    Matrix means(k, d);
    Matrix vars(k, d);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t col = 0; col < d; ++col) {
            means(c, col) = j.at("means").at(c).at(col).get<double>();
            vars(c, col) = j.at("variances").at(c).at(col).get<double>();
        }
    }
    GmmParams params;
    params.k = k;
    params.seed = j.at("seed").get<std::uint64_t>();
    params.reg = j.at("reg").get<double>();
    return GaussianMixture(k, j.at("weights").get<std::vector<double>>(), std::move(means),
                           std::move(vars), standardizer_from_json(j.at("standardizer")),
                           params);
}

}  // namespace dtor
