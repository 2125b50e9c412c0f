#include <sys/wait.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dtor/detect.hpp"
#include "dtor/json_io.hpp"

namespace dtor {

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        const fs::path base = fs::temp_directory_path();
        for (int attempt = 0; attempt < 64; ++attempt) {
            fs::path candidate = base / ("dtor-ext-" + std::to_string(::getpid()) + "-" +
                                         std::to_string(attempt) + "-" +
                                         std::to_string(std::rand()));
            std::error_code ec;
            if (fs::create_directory(candidate, ec)) {
                path = candidate;
                return;
            }
        }
        throw std::runtime_error("external scorer: cannot create temp directory");
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string read_file(const fs::path& p, std::size_t limit = 4096) {
    std::ifstream in(p);
    std::string out;
    char c;
    while (out.size() < limit && in.get(c)) out.push_back(c);
    return out;
}

}  // namespace

ExternalScorer::ExternalScorer(std::string command, std::size_t n_features)
    : command_(std::move(command)), n_features_(n_features) {
    if (command_.empty()) throw std::invalid_argument("external scorer: empty command");
}

std::vector<double> ExternalScorer::score_rows(const Matrix& rows) const {
    if (rows.n_cols != n_features_)
        throw std::invalid_argument("score: row width does not match detector");

    TempDir dir;
    const fs::path in_path = dir.path / "rows.csv";
    const fs::path out_path = dir.path / "scores.txt";
    const fs::path err_path = dir.path / "stderr.txt";

    {
        std::ofstream out(in_path);
        for (std::size_t i = 0; i < rows.n_rows; ++i) {
            const auto row = rows.row(i);
            for (std::size_t j = 0; j < rows.n_cols; ++j) {
                if (j) out << ',';
                out << format_double(row[j]);
            }
            out << '\n';
        }
        if (!out) throw std::runtime_error("external scorer: failed to write input rows");
    }

    const std::string shell_cmd = command_ + " < '" + in_path.string() + "' > '" +
                                  out_path.string() + "' 2> '" + err_path.string() + "'";
    const int status = std::system(shell_cmd.c_str());
    const bool exited_ok = status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
    if (!exited_ok) {
        std::ostringstream msg;
        msg << "external scorer failed (command: " << command_ << ", raw status " << status << ")";
        const std::string err = read_file(err_path);
        if (!err.empty()) msg << "; stderr: " << err;
        throw std::runtime_error(msg.str());
    }

    std::ifstream in(out_path);
    std::vector<double> scores;
    scores.reserve(rows.n_rows);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        double v = 0.0;
        const char* first = line.data();
        const char* last = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last || !std::isfinite(v))
            throw std::runtime_error("external scorer: unparseable score line '" + line + "'");
        scores.push_back(v);
    }
    if (scores.size() != rows.n_rows) {
        std::ostringstream msg;
        msg << "external scorer: expected " << rows.n_rows << " scores, got " << scores.size();
        throw std::runtime_error(msg.str());
    }
    return scores;
}

nlohmann::ordered_json ExternalScorer::to_json() const {
    nlohmann::ordered_json j;
    j["type"] = "external";
    j["n_features"] = n_features_;
    j["command"] = command_;
    return j;
}

ExternalScorer ExternalScorer::from_json(const nlohmann::json& j) {
    return ExternalScorer(j.at("command").get<std::string>(),
                          j.at("n_features").get<std::size_t>());
}

}  // namespace dtor
