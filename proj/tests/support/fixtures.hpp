#pragma once

// Deterministic synthetic fixtures shared by the unit and acceptance suites.
//
// The three *_shape datasets mirror the row/column geometry and value
// character of the public UCI benchmark tables this tool targets (glass
// 214x9 continuous, ionosphere 351x34 continuous in [-1,1], lymphography
// 148x19 low-cardinality integer codes). They are generated, not the real
// files: each is a clustered inlier population plus a small spread anomaly
// population, so detectors have genuine structure to find. Point the
// acceptance suite at real UCI CSVs via DTOR_DATA_DIR when available.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "dtor/dataset.hpp"
#include "dtor/json_io.hpp"
#include "dtor/matrix.hpp"
#include "dtor/rng.hpp"

namespace fixtures {

namespace fs = std::filesystem;

inline fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("dtor-tests-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

inline void write_csv(const fs::path& path, const dtor::Matrix& m,
                      const std::vector<std::string>& names) {
    std::ofstream out(path);
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (j) out << ',';
        out << names[j];
    }
    out << '\n';
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        for (std::size_t j = 0; j < m.n_cols; ++j) {
            if (j) out << ',';
            out << dtor::format_double(m(i, j));
        }
        out << '\n';
    }
}

inline std::vector<std::string> default_names(std::size_t d) {
    std::vector<std::string> names(d);
    for (std::size_t j = 0; j < d; ++j) names[j] = "feature_" + std::to_string(j);
    return names;
}

// n_inliers rows around k cluster centers plus n_outliers uniform rows far
// outside the cluster envelope; outliers occupy the last rows.
inline dtor::Matrix clustered_with_outliers(std::size_t n_inliers, std::size_t n_outliers,
                                            std::size_t d, std::size_t k, double center_span,
                                            double cluster_sigma, double outlier_reach,
                                            std::uint64_t seed) {
    dtor::Rng rng(seed);
    dtor::Matrix centers(k, d);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j) centers(c, j) = rng.uniform(-center_span, center_span);

    dtor::Matrix m(n_inliers + n_outliers, d);
    for (std::size_t i = 0; i < n_inliers; ++i) {
        const std::size_t c = rng.index(k);
        for (std::size_t j = 0; j < d; ++j)
            m(i, j) = centers(c, j) + cluster_sigma * rng.normal();
    }
    for (std::size_t i = n_inliers; i < m.n_rows; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            m(i, j) = sign * rng.uniform(outlier_reach * 0.5, outlier_reach);
        }
    }
    return m;
}

inline dtor::Matrix glass_shape_matrix() {
    // 214 x 9, six clusters, ~5% anomalies
    return clustered_with_outliers(203, 11, 9, 6, 4.0, 0.45, 12.0, 9001);
}

inline dtor::Matrix ionosphere_shape_matrix() {
    // 351 x 34 clipped to [-1, 1]; anomalies sit on the cube edge
    dtor::Matrix m = clustered_with_outliers(334, 17, 34, 2, 0.5, 0.12, 1.0, 9002);
    for (double& v : m.values) v = std::clamp(v, -1.0, 1.0);
    return m;
}

inline dtor::Matrix lymphography_shape_matrix() {
    // 148 x 19 integer codes in {0..3}: two inlier profiles with strongly
    // peaked code distributions, anomalies draw codes uniformly
    dtor::Rng rng(9003);
    const std::size_t n = 148, d = 19, n_out = 8;
    dtor::Matrix m(n, d);
    for (std::size_t i = 0; i < n - n_out; ++i) {
        const bool profile = rng.uniform() < 0.5;
        for (std::size_t j = 0; j < d; ++j) {
            const double u = rng.uniform();
            const double peak = (j + (profile ? 0 : 1)) % 2 ? 0.0 : 1.0;
            if (u < 0.82) {
                m(i, j) = peak;
            } else if (u < 0.94) {
                m(i, j) = peak == 0.0 ? 1.0 : 0.0;
            } else {
                m(i, j) = 2.0 + (rng.uniform() < 0.5 ? 0.0 : 1.0);
            }
        }
    }
    for (std::size_t i = n - n_out; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = double(rng.index(4));
    return m;
}

struct NamedFixture {
    std::string id;
    fs::path path;
    std::size_t n_rows;
    std::size_t n_cols;
};

// Writes the shape fixture CSVs once per process and returns their paths.
// If DTOR_DATA_DIR is set and holds <id>.csv files, those are used instead.
inline std::vector<NamedFixture> benchmark_fixtures() {
    static const std::vector<NamedFixture> fixtures = [] {
        std::vector<NamedFixture> out;
        const char* override_dir = std::getenv("DTOR_DATA_DIR");
        const auto add = [&](const std::string& id, const dtor::Matrix& m) {
            if (override_dir) {
                const fs::path candidate = fs::path(override_dir) / (id + ".csv");
                if (fs::exists(candidate)) {
                    out.push_back({id, candidate, 0, 0});
                    return;
                }
            }
            const fs::path path = scratch_dir() / (id + "_shape.csv");
            write_csv(path, m, default_names(m.n_cols));
            out.push_back({id, path, m.n_rows, m.n_cols});
        };
        add("glass", glass_shape_matrix());
        add("ionosphere", ionosphere_shape_matrix());
        add("lymphography", lymphography_shape_matrix());
        return out;
    }();
    return fixtures;
}

// 2-D blob with one planted far outlier appended as the last row.
inline dtor::Matrix blob_with_planted_outlier(std::size_t n, double far, std::uint64_t seed) {
    dtor::Rng rng(seed);
    dtor::Matrix m(n + 1, 2);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, 0) = rng.normal();
        m(i, 1) = rng.normal();
    }
    m(n, 0) = far;
    m(n, 1) = far;
    return m;
}

inline dtor::Dataset dataset_from_matrix(const dtor::Matrix& m,
                                         dtor::FeatureKind kind = dtor::FeatureKind::Numeric) {
    dtor::Dataset ds;
    ds.rows = m;
    ds.meta.resize(m.n_cols);
    for (std::size_t j = 0; j < m.n_cols; ++j) {
        ds.meta[j].name = "feature_" + std::to_string(j);
        ds.meta[j].kind = kind;
        ds.meta[j].index = j;
        if (kind == dtor::FeatureKind::Categorical) {
            std::set<long long> codes;
            for (std::size_t i = 0; i < m.n_rows; ++i)
                codes.insert(static_cast<long long>(m(i, j)));
            ds.meta[j].codes.assign(codes.begin(), codes.end());
        }
    }
    return ds;
}

}  // namespace fixtures
