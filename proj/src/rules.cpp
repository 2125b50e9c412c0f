#include "dtor/rules.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dtor/json_io.hpp"

namespace dtor {

namespace {

std::size_t max_feature(const Rule& rule) {
    std::size_t m = 0;
    for (const auto& p : rule.predicates) m = std::max(m, p.feature);
    return m;
}

std::string feature_name(std::size_t f, const std::vector<FeatureMeta>& meta) {
    if (f < meta.size() && !meta[f].name.empty()) return meta[f].name;
    return "feature_" + std::to_string(f);
}

}  // namespace

Rule rule_from_path(const std::vector<PathStep>& path, std::optional<double> leaf_value) {
    Rule rule;
    rule.predicates.reserve(path.size());
    for (const auto& step : path) {
        rule.predicates.push_back({step.feature,
                                   step.direction == Dir::LE ? PredOp::LE : PredOp::GT,
                                   step.threshold});
    }
    rule.leaf_value = leaf_value;
    return rule;
}

bool satisfies(const Rule& rule, std::span<const double> z) {
    if (!rule.empty() && z.size() <= max_feature(rule))
        throw std::invalid_argument("satisfies: row too narrow for rule");
    for (const auto& p : rule.predicates)
        if (!p.holds(z)) return false;
    return true;
}

Rule simplify(const Rule& rule) {
    // per feature: the tightest GT (max) and the tightest LE (min) survive
    std::map<std::size_t, std::pair<std::optional<double>, std::optional<double>>> bounds;
    for (const auto& p : rule.predicates) {
        auto& [gt, le] = bounds[p.feature];
        if (p.op == PredOp::GT) {
            gt = gt ? std::max(*gt, p.threshold) : p.threshold;
        } else {
            le = le ? std::min(*le, p.threshold) : p.threshold;
        }
    }
    Rule out;
    out.leaf_value = rule.leaf_value;
    for (const auto& [feature, interval] : bounds) {
        const auto& [gt, le] = interval;
        if (gt && le && *gt >= *le) {
            std::ostringstream msg;
            msg << "simplify: empty interval on feature " << feature << " (> " << *gt
                << " and <= " << *le << ")";
            throw std::invalid_argument(msg.str());
        }
        if (gt) out.predicates.push_back({feature, PredOp::GT, *gt});
        if (le) out.predicates.push_back({feature, PredOp::LE, *le});
    }
    return out;
}

double coverage(const Rule& rule, const Dataset& ds) {
    if (ds.n_rows() == 0) throw std::invalid_argument("coverage: empty dataset");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) hits += satisfies(rule, ds.rows.row(i));
    return static_cast<double>(hits) / static_cast<double>(ds.n_rows());
}

int validity(const Rule& rule, std::span<const double> x) {
    return satisfies(rule, x) ? 1 : 0;
}

std::string render(const Rule& rule, const std::vector<FeatureMeta>& meta) {
    if (rule.empty()) return "TRUE";
    std::string out;
    for (std::size_t i = 0; i < rule.predicates.size(); ++i) {
        const auto& p = rule.predicates[i];
        if (i) out += " AND ";
        out += feature_name(p.feature, meta);
        out += p.op == PredOp::LE ? " <= " : " > ";
        out += format_double(p.threshold);
    }
    return out;
}

std::string render_annotated(const Rule& rule, const std::vector<FeatureMeta>& meta) {
    if (rule.empty()) return "TRUE";
    // gather per-feature intervals so a categorical feature prints one set
    std::map<std::size_t, std::pair<std::optional<double>, std::optional<double>>> bounds;
    for (const auto& p : rule.predicates) {
        auto& [gt, le] = bounds[p.feature];
        if (p.op == PredOp::GT) {
            gt = gt ? std::max(*gt, p.threshold) : p.threshold;
        } else {
            le = le ? std::min(*le, p.threshold) : p.threshold;
        }
    }
    std::string out;
    bool first = true;
    std::vector<bool> done_categorical(meta.size(), false);
    for (const auto& p : rule.predicates) {
        const std::size_t f = p.feature;
        const bool categorical = f < meta.size() && meta[f].kind == FeatureKind::Categorical &&
                                 !meta[f].codes.empty();
        if (categorical && done_categorical[f]) continue;
        if (!first) out += " AND ";
        first = false;
        if (!categorical) {
            out += feature_name(f, meta);
            out += p.op == PredOp::LE ? " <= " : " > ";
            out += format_double(p.threshold);
            continue;
        }
        done_categorical[f] = true;
        const auto& [gt, le] = bounds[f];
        out += feature_name(f, meta);
        out += " in {";
        bool any = false;
        for (const long long code : meta[f].codes) {
            const double v = static_cast<double>(code);
            if (gt && !(v > *gt)) continue;
            if (le && !(v <= *le)) continue;
            if (any) out += ",";
            out += std::to_string(code);
            any = true;
        }
        out += "}";
    }
    return out;
}

Rule parse_rule(const std::string& text, const std::vector<FeatureMeta>& meta) {
    Rule rule;
    if (text == "TRUE") return rule;

    std::map<std::string, std::size_t> by_name;
    for (const auto& fm : meta) by_name[fm.name] = fm.index;

    const auto resolve = [&](const std::string& name) -> std::size_t {
        const auto it = by_name.find(name);
        if (it != by_name.end()) return it->second;
        if (name.rfind("feature_", 0) == 0) {
            std::size_t idx = 0;
            const char* first = name.data() + 8;
            const char* last = name.data() + name.size();
            auto [ptr, ec] = std::from_chars(first, last, idx);
            if (ec == std::errc{} && ptr == last) return idx;
        }
        throw std::invalid_argument("parse_rule: unknown feature '" + name + "'");
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find(" AND ", pos);
        if (end == std::string::npos) end = text.size();
        const std::string clause = text.substr(pos, end - pos);
        pos = end == text.size() ? end : end + 5;

        PredOp op;
        std::size_t op_pos = clause.find(" <= ");
        std::size_t op_len = 4;
        if (op_pos != std::string::npos) {
            op = PredOp::LE;
        } else {
            op_pos = clause.find(" > ");
            op_len = 3;
            if (op_pos == std::string::npos)
                throw std::invalid_argument("parse_rule: no comparison in '" + clause + "'");
            op = PredOp::GT;
        }
        const std::string name = clause.substr(0, op_pos);
        const std::string value = clause.substr(op_pos + op_len);
        double thr = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), thr);
        if (ec != std::errc{} || ptr != value.data() + value.size())
            throw std::invalid_argument("parse_rule: bad threshold '" + value + "'");
        rule.predicates.push_back({resolve(name), op, thr});
    }
    return rule;
}

}  // namespace dtor
