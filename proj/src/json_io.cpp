#include "dtor/json_io.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace dtor {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

namespace {

nlohmann::ordered_json node_to_json(const std::vector<TreeNode>& nodes, int at) {
    const TreeNode& node = nodes[at];
    nlohmann::ordered_json j;
    if (node.is_leaf()) {
        j["value"] = node.value;
        j["weight"] = node.weight;
        j["n"] = node.n_samples;
    } else {
        j["feature"] = node.feature;
        j["threshold"] = node.threshold;
        j["left"] = node_to_json(nodes, node.left);
        j["right"] = node_to_json(nodes, node.right);
    }
    return j;
}

int node_from_json(const nlohmann::json& j, std::vector<TreeNode>& nodes) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    if (j.contains("feature")) {
        nodes[id].feature = j.at("feature").get<int>();
        nodes[id].threshold = j.at("threshold").get<double>();
        const int left = node_from_json(j.at("left"), nodes);
        nodes[id].left = left;
        const int right = node_from_json(j.at("right"), nodes);
        nodes[id].right = right;
        // roll up leaf totals so internal nodes keep their aggregates
        nodes[id].weight = nodes[left].weight + nodes[right].weight;
        nodes[id].n_samples = nodes[left].n_samples + nodes[right].n_samples;
        nodes[id].value = (nodes[left].weight * nodes[left].value +
                           nodes[right].weight * nodes[right].value) /
                          nodes[id].weight;
    } else {
        nodes[id].value = j.at("value").get<double>();
        nodes[id].weight = j.at("weight").get<double>();
        nodes[id].n_samples = j.at("n").get<std::size_t>();
    }
    return id;
}

}  // namespace

nlohmann::ordered_json tree_to_json(const RegressionTree& tree) {
    nlohmann::ordered_json j;
    j["n_features"] = tree.n_features();
    j["root"] = node_to_json(tree.nodes(), 0);
    return j;
}

RegressionTree tree_from_json(const nlohmann::json& j) {
    std::vector<TreeNode> nodes;
    node_from_json(j.at("root"), nodes);
    return RegressionTree(std::move(nodes), j.at("n_features").get<std::size_t>());
}

nlohmann::ordered_json rule_to_json(const Rule& rule, const std::vector<FeatureMeta>& meta) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json preds = nlohmann::ordered_json::array();
    for (const auto& p : rule.predicates) {
        nlohmann::ordered_json pj;
        pj["feature"] = p.feature;
        pj["op"] = p.op == PredOp::LE ? "LE" : "GT";
        pj["threshold"] = p.threshold;
        preds.push_back(std::move(pj));
    }
    j["predicates"] = std::move(preds);
    if (rule.leaf_value) {
        j["leaf_value"] = *rule.leaf_value;
    } else {
        j["leaf_value"] = nullptr;
    }
    j["rendered"] = render(rule, meta);
    return j;
}

Rule rule_from_json(const nlohmann::json& j) {
    Rule rule;
    for (const auto& pj : j.at("predicates")) {
        const std::string op = pj.at("op").get<std::string>();
        if (op != "LE" && op != "GT")
            throw std::invalid_argument("rule_from_json: bad op '" + op + "'");
        rule.predicates.push_back({pj.at("feature").get<std::size_t>(),
                                   op == "LE" ? PredOp::LE : PredOp::GT,
                                   pj.at("threshold").get<double>()});
    }
    if (j.contains("leaf_value") && !j.at("leaf_value").is_null())
        rule.leaf_value = j.at("leaf_value").get<double>();
    return rule;
}

nlohmann::ordered_json record_to_json(const ExplanationRecord& rec,
                                      const std::vector<FeatureMeta>& meta,
                                      bool include_timings) {
    nlohmann::ordered_json j;
    j["index"] = rec.index;
    if (rec.error) {
        j["error"] = *rec.error;
        return j;
    }
    j["anomaly_score"] = rec.anomaly_score;
    j["is_outlier"] = rec.is_outlier;
    j["rule"] = rule_to_json(rec.rule, meta);
    j["precision"] = rec.precision;
    j["coverage"] = rec.coverage;
    j["validity"] = rec.validity;
    j["rule_length"] = rec.rule_length;
    if (include_timings) {
        j["explain_seconds"] = rec.explain_seconds;
        j["precision_seconds"] = rec.precision_seconds;
        j["wall_seconds"] = rec.wall_seconds;
    }
    return j;
}

nlohmann::ordered_json report_to_json(const BenchmarkReport& report, bool include_timings) {
    nlohmann::ordered_json j;
    j["n_records"] = report.n_records;
    j["n_errors"] = report.n_errors;
    j["precision_mean"] = report.precision_mean;
    j["precision_std"] = report.precision_std;
    j["coverage_mean"] = report.coverage_mean;
    j["coverage_std"] = report.coverage_std;
    j["validity_percent"] = report.validity_percent;
    j["rule_length_mean"] = report.rule_length_mean;
    if (include_timings) {
        j["time_mean"] = report.time_mean;
        j["time_max"] = report.time_max;
    }
    return j;
}

nlohmann::ordered_json standardizer_to_json(const Standardizer& s) {
    nlohmann::ordered_json j;
    j["mean"] = s.mean;
    j["sigma"] = s.sigma;
    return j;
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.sigma = j.at("sigma").get<std::vector<double>>();
    if (s.mean.size() != s.sigma.size())
        throw std::invalid_argument("standardizer_from_json: mean/sigma size mismatch");
    return s;
}

nlohmann::ordered_json feature_meta_to_json(const std::vector<FeatureMeta>& meta) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& fm : meta) {
        nlohmann::ordered_json j;
        j["name"] = fm.name;
        j["kind"] = to_string(fm.kind);
        if (fm.kind == FeatureKind::Categorical) j["codes"] = fm.codes;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::vector<FeatureMeta> feature_meta_from_json(const nlohmann::json& j) {
    std::vector<FeatureMeta> meta;
    for (const auto& fj : j) {
        FeatureMeta fm;
        fm.name = fj.at("name").get<std::string>();
        fm.kind = feature_kind_from_string(fj.at("kind").get<std::string>());
        fm.index = meta.size();
        if (fj.contains("codes")) fm.codes = fj.at("codes").get<std::vector<long long>>();
        meta.push_back(std::move(fm));
    }
    return meta;
}

namespace {

void canonical_escape(const std::string& s, std::string& out) {
    out += '"';
    for (const char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void canonical_write(const nlohmann::json& j, std::string& out) {
    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& [key, value] : j.items()) {  // std::map keys: already sorted
                if (!first) out += ',';
                first = false;
                canonical_escape(key, out);
                out += ':';
                canonical_write(value, out);
            }
            out += '}';
            break;
        }
        case nlohmann::json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ',';
                canonical_write(j[i], out);
            }
            out += ']';
            break;
        }
        case nlohmann::json::value_t::number_float: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", j.get<double>());
            out += buf;
            break;
        }
        case nlohmann::json::value_t::string:
            canonical_escape(j.get<std::string>(), out);
            break;
        default:
            out += j.dump();
    }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& j) {
    std::string out;
    canonical_write(j, out);
    return out;
}

}  // namespace dtor
