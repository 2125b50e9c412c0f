#include "dtor/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dtor/rng.hpp"

#include "json.hpp"

namespace dtor {

std::string to_string(FeatureKind kind) {
    return kind == FeatureKind::Numeric ? "numeric" : "categorical";
}

FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "numeric") return FeatureKind::Numeric;
    if (s == "categorical") return FeatureKind::Categorical;
    throw std::invalid_argument("unknown feature kind '" + s + "' (expected numeric|categorical)");
}

Dataset Dataset::select(std::span<const std::size_t> idx) const {
    Dataset out;
    out.rows = rows.select_rows(idx);
    out.meta = meta;
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.emplace_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

char detect_delimiter(std::string_view header) {
    // precedence: comma, semicolon, tab
    const char candidates[] = {',', ';', '\t'};
    char best = ',';
    std::size_t best_count = 0;
    for (char c : candidates) {
        const std::size_t count = std::count(header.begin(), header.end(), c);
        if (count > best_count) {
            best = c;
            best_count = count;
        }
    }
    return best;  // zero occurrences anywhere -> comma, which yields one column
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col_name) {
    const auto fail = [&](const char* what) {
        std::ostringstream msg;
        msg << what << " at row " << row << ", column '" << col_name << "'";
        if (!cell.empty()) msg << " (value '" << cell << "')";
        throw std::runtime_error(msg.str());
    };
    if (cell.empty()) fail("missing value");
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) fail("unparseable value");
    if (!std::isfinite(v)) fail("non-finite value");
    return v;
}

bool is_integer_code(double v) {
    return v >= 0.0 && v <= 9007199254740992.0 && v == std::floor(v);
}

}  // namespace

Dataset load_table(const std::filesystem::path& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty dataset file: " + path.string());

    const char delim = opts.delimiter != '\0' ? opts.delimiter : detect_delimiter(header);
    const auto names = split_line(header, delim);
    const std::size_t d = names.size();
    if (d == 0) throw std::runtime_error("no columns in header of " + path.string());

    std::set<std::string> seen;
    for (const auto& name : names) {
        if (name.empty()) throw std::runtime_error("empty column name in header of " + path.string());
        if (!seen.insert(name).second)
            throw std::runtime_error("duplicate column name '" + name + "' in " + path.string());
    }

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();

    Matrix m(0, d);
    std::vector<double> parsed(d);
    for (std::size_t r = 0; r < lines.size(); ++r) {
        const std::size_t row = r + 1;  // 1-based data row numbering in messages
        const auto cells = split_line(lines[r], delim);
        if (cells.size() != d) {
            std::ostringstream msg;
            msg << "row " << row << " has " << cells.size() << " cells, expected " << d;
            throw std::runtime_error(msg.str());
        }
        for (std::size_t j = 0; j < d; ++j) parsed[j] = parse_cell(cells[j], row, names[j]);
        m.append_row(parsed);
    }
    if (m.n_rows == 0) throw std::runtime_error("dataset has no data rows: " + path.string());

    for (const auto& [name, kind] : opts.kind_override) {
        (void)kind;
        if (!seen.count(name))
            throw std::runtime_error("kind override names unknown column '" + name + "'");
    }

    Dataset ds;
    ds.rows = std::move(m);
    ds.meta.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
        FeatureMeta& fm = ds.meta[j];
        fm.name = names[j];
        fm.index = j;

        std::set<double> distinct;
        bool all_codes = true;
        for (std::size_t i = 0; i < ds.rows.n_rows; ++i) {
            const double v = ds.rows(i, j);
            all_codes = all_codes && is_integer_code(v);
            if (all_codes && distinct.size() <= opts.categorical_max_distinct) distinct.insert(v);
        }

        const auto it = opts.kind_override.find(fm.name);
        if (it != opts.kind_override.end()) {
            fm.kind = it->second;
        } else {
            fm.kind = (all_codes && distinct.size() <= opts.categorical_max_distinct)
                          ? FeatureKind::Categorical
                          : FeatureKind::Numeric;
        }

        if (fm.kind == FeatureKind::Categorical) {
            if (!all_codes)
                throw std::runtime_error("column '" + fm.name +
                                         "' declared categorical but holds non-integer or negative values");
            std::set<long long> codes;
            for (std::size_t i = 0; i < ds.rows.n_rows; ++i)
                codes.insert(static_cast<long long>(ds.rows(i, j)));
            fm.codes.assign(codes.begin(), codes.end());
        }
    }
    return ds;
}

std::map<std::string, FeatureKind> read_kind_override(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kind override file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid kind override JSON in " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("kind override must be a JSON object");
    std::map<std::string, FeatureKind> out;
    for (const auto& [name, val] : j.items())
        out[name] = feature_kind_from_string(val.get<std::string>());
    return out;
}

void Standardizer::transform_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) out[j] = (in[j] - mean[j]) / sigma[j];
}

void Standardizer::inverse_row(std::span<const double> in, std::span<double> out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) out[j] = in[j] * sigma[j] + mean[j];
}

Matrix Standardizer::transform(const Matrix& m) const {
    if (m.n_cols != n_features()) throw std::invalid_argument("standardizer width mismatch");
    Matrix out(m.n_rows, m.n_cols);
    for (std::size_t i = 0; i < m.n_rows; ++i) transform_row(m.row(i), out.row(i));
    return out;
}

Matrix Standardizer::inverse(const Matrix& m) const {
    if (m.n_cols != n_features()) throw std::invalid_argument("standardizer width mismatch");
    Matrix out(m.n_rows, m.n_cols);
    for (std::size_t i = 0; i < m.n_rows; ++i) inverse_row(m.row(i), out.row(i));
    return out;
}

Standardizer fit_standardizer(const Dataset& train) {
    if (train.n_rows() == 0) throw std::invalid_argument("fit_standardizer: empty dataset");
    const std::size_t n = train.n_rows();
    const std::size_t d = train.n_cols();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.sigma.assign(d, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        if (train.meta[j].kind == FeatureKind::Categorical) continue;  // identity
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += train.rows(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dlt = train.rows(i, j) - mean;
            var += dlt * dlt;
        }
        var /= static_cast<double>(n);
        const double sigma = std::sqrt(var);
        s.mean[j] = mean;
        s.sigma[j] = sigma > 0.0 ? sigma : 1.0;
    }
    return s;
}

TrainTestSplit split_train_test(const Dataset& ds, std::size_t n_test, std::uint64_t seed) {
    const std::size_t n = ds.n_rows();
    if (n_test == 0 || n_test >= n)
        throw std::invalid_argument("split_train_test: need 0 < n_test < n_rows");

    Rng rng(seed);
    auto test_idx = rng.sample_without_replacement(n, n_test);
    std::sort(test_idx.begin(), test_idx.end());

    std::vector<std::size_t> train_idx;
    train_idx.reserve(n - n_test);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (k < test_idx.size() && test_idx[k] == i) {
            ++k;
        } else {
            train_idx.push_back(i);
        }
    }

    TrainTestSplit split;
    split.train = ds.select(train_idx);
    split.test = ds.select(test_idx);
    split.train_indices = std::move(train_idx);
    split.test_indices = std::move(test_idx);
    return split;
}

}  // namespace dtor
