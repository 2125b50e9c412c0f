#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dtor/detect.hpp"

namespace dtor {

std::vector<double> score(const Detector& model, const Matrix& rows) {
    if (rows.n_cols != model.n_features())
        throw std::invalid_argument("score: row width does not match detector");
    auto scores = model.score_rows(rows);
    for (const double s : scores)
        if (!std::isfinite(s)) throw std::runtime_error("score: detector produced non-finite score");
    return scores;
}

Threshold threshold_from_contamination(const std::vector<double>& train_scores,
                                       double contamination) {
    if (train_scores.empty())
        throw std::invalid_argument("threshold_from_contamination: empty scores");
    if (!(contamination > 0.0 && contamination < 1.0))
        throw std::invalid_argument("threshold_from_contamination: contamination must be in (0,1)");

    std::vector<double> sorted = train_scores;
    std::sort(sorted.begin(), sorted.end());
    // empirical quantile, lower interpolation
    const double pos = contamination * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(std::floor(pos));
    return Threshold{sorted[i], contamination};
}

bool is_outlier(double s, const Threshold& th) {
    return s < th.t;
}

std::unique_ptr<Detector> detector_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "iforest") return std::make_unique<IsolationForest>(IsolationForest::from_json(j));
    if (type == "gmm") return std::make_unique<GaussianMixture>(GaussianMixture::from_json(j));
    if (type == "external") return std::make_unique<ExternalScorer>(ExternalScorer::from_json(j));
    throw std::invalid_argument("unknown detector type '" + type + "'");
}

}  // namespace dtor
