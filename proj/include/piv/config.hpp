#pragma once

// JSON analysis configuration consumed by the command-line tool.
//
// {
//   "observed": {"r_squared": 0.36, "n_ob": 7639, "y_t_ob": 36.77, "y_c_ob": 45.78,
//                "var_t": 143.26, "var_c": 138.83, "pi": 0.0617},
//   "sign": "negative",
//   "threshold": {"kind": "statistical", "critical": 1.96},
//   "beliefs": [
//     {"name": "corner", "point": {"y_t_un": 45.78, "y_c_un": 45.2}},
//     {"name": "belief1", "region": {"y_t_un": [null, 45.78], "y_c_un": [45.2, 45.2]}}
//   ],
//   "piv_threshold": 0.8,
//   "grid": {"nt": 200, "nc": 200}
// }
//
// A null interval end is unbounded. Unknown keys are rejected.

#include "piv/bounds.hpp"
#include "piv/core.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace piv {

struct NamedBelief {
    std::string name;
    std::variant<CounterfactualBelief, BeliefRegion> belief;

    bool is_point() const noexcept { return std::holds_alternative<CounterfactualBelief>(belief); }
    bool operator==(const NamedBelief&) const = default;
};

struct GridSize {
    std::size_t nt = 0;
    std::size_t nc = 0;
    bool operator==(const GridSize&) const = default;
};

struct AnalysisConfig {
    explicit AnalysisConfig(ObservedStats stats) : observed(stats) {}

    ObservedStats observed;
    EstimateSign sign = EstimateSign::Positive;
    Threshold threshold = StatisticalThreshold{};
    std::vector<NamedBelief> beliefs;
    double piv_threshold = 0.8;
    std::optional<GridSize> grid;

    // Throws Error(InvalidArgument) when no belief has this name.
    const NamedBelief& belief(const std::string& name) const;

    bool operator==(const AnalysisConfig&) const = default;
};

// Throws Error with a message prefixed by the offending field path.
AnalysisConfig parse_config(const nlohmann::json& doc);
AnalysisConfig parse_config_text(const std::string& text);
AnalysisConfig load_config(const std::string& path);

nlohmann::json to_json(const AnalysisConfig& config);

// Parses "NTxNC", e.g. "200x200".
GridSize parse_grid_size(const std::string& text);

} // namespace piv
