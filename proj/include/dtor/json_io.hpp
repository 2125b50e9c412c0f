#pragma once

#include <string>
#include <vector>

#include "dtor/dataset.hpp"
#include "dtor/eval.hpp"
#include "dtor/rules.hpp"
#include "dtor/tree.hpp"

#include "json.hpp"

namespace dtor {

// Tree nodes serialize as nested objects: internal nodes as
// {"feature", "threshold", "left", "right"}, leaves as
// {"value", "weight", "n"}. Field order is stable.
nlohmann::ordered_json tree_to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& j);

// {"predicates": [{"feature", "op", "threshold"}], "leaf_value", "rendered"}
nlohmann::ordered_json rule_to_json(const Rule& rule,
                                    const std::vector<FeatureMeta>& meta = {});
Rule rule_from_json(const nlohmann::json& j);

nlohmann::ordered_json record_to_json(const ExplanationRecord& rec,
                                      const std::vector<FeatureMeta>& meta,
                                      bool include_timings = true);
nlohmann::ordered_json report_to_json(const BenchmarkReport& report,
                                      bool include_timings = true);

nlohmann::ordered_json standardizer_to_json(const Standardizer& s);
Standardizer standardizer_from_json(const nlohmann::json& j);

nlohmann::ordered_json feature_meta_to_json(const std::vector<FeatureMeta>& meta);
std::vector<FeatureMeta> feature_meta_from_json(const nlohmann::json& j);

// Canonical form for golden files and determinism checks: keys sorted,
// every floating-point number printed with 17 significant digits, no
// whitespace. Wall-clock fields are excluded by the callers that target this
// format because they are environment-dependent, not recomputable.
std::string canonical_dump(const nlohmann::json& j);

// Shortest round-trip decimal for a double ("2", "1.5", "6.25").
std::string format_double(double v);

}  // namespace dtor
