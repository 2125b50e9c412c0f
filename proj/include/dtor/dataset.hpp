#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dtor/matrix.hpp"

namespace dtor {

enum class FeatureKind { Numeric, Categorical };

std::string to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(const std::string& s);

struct FeatureMeta {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    std::size_t index = 0;
    // For categorical columns: the sorted distinct integer codes seen at load.
    std::vector<long long> codes;
};

struct Dataset {
    Matrix rows;
    std::vector<FeatureMeta> meta;

    std::size_t n_rows() const { return rows.n_rows; }
    std::size_t n_cols() const { return rows.n_cols; }

    Dataset select(std::span<const std::size_t> idx) const;
};

struct LoadOptions {
    // '\0' means auto-detect among comma / semicolon / tab.
    char delimiter = '\0';
    // Per-column kind override by column name; wins over inference.
    std::map<std::string, FeatureKind> kind_override;
    // Integer-valued non-negative columns with at most this many distinct
    // values are inferred Categorical.
    std::size_t categorical_max_distinct = 10;
};

// Loads a delimiter-separated file with a header row. Any unparseable or
// missing cell is a hard error naming the row and column; there is no
// imputation.
Dataset load_table(const std::filesystem::path& path, const LoadOptions& opts = {});

// Reads a JSON file mapping column name -> "numeric" | "categorical".
std::map<std::string, FeatureKind> read_kind_override(const std::filesystem::path& path);

// Per-feature affine scaler. Categorical columns get the identity transform
// (mean 0, sigma 1); constant numeric columns get sigma 1 so the transform
// stays invertible.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sigma;

    std::size_t n_features() const { return mean.size(); }
    void transform_row(std::span<const double> in, std::span<double> out) const;
    void inverse_row(std::span<const double> in, std::span<double> out) const;
    Matrix transform(const Matrix& m) const;
    Matrix inverse(const Matrix& m) const;
};

// Population (not sample) standard deviation.
Standardizer fit_standardizer(const Dataset& train);

struct TrainTestSplit {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_indices;  // ascending, into the source dataset
    std::vector<std::size_t> test_indices;   // ascending
};

// Seeded uniform sampling without replacement; same seed, same split.
TrainTestSplit split_train_test(const Dataset& ds, std::size_t n_test, std::uint64_t seed);

}  // namespace dtor
