#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinex/measures.hpp"

namespace kinex {

enum class ExperimentKind {
    canonical,
    wealth_stationary,
    product_check,
    duality_energy,
    duality_wealth,
    diffusion,
    nagent,
    eps_infinity,
};

std::string experiment_name(ExperimentKind kind);
ExperimentKind experiment_from_name(const std::string& name);

// kind -> one-line description, in catalogue order.
const std::vector<std::pair<ExperimentKind, std::string>>& experiment_catalogue();

// Parses the key = value config text into a JSON tree. Supported syntax:
// `key = value` lines, `[section]` headers (one level), `#` comments, and
// string / number / boolean / array / inline-table values. Duplicate keys and
// malformed lines raise config_error with the line number.
nlohmann::json parse_config_text(const std::string& text);

// Reads and parses a config file; config_error when unreadable.
nlohmann::json load_config_file(const std::string& path);

// Command-line overrides applied on top of the file values.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::optional<int> threads;
    std::optional<std::string> out;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::canonical;
    std::uint64_t seed = 12345;
    long trials = 0; // resolved trial/path count; 0 for purely analytic runs
    int threads = 1;
    std::string out = "out";
    nlohmann::json params; // experiment-specific keys with defaults resolved
};

// Validates the parsed tree against the schema of its experiment and resolves
// defaults. Unknown keys, missing required keys and out-of-range values raise
// config_error naming the offending key.
ExperimentConfig validate_config(const nlohmann::json& tree,
                                 const CliOverrides& overrides = {});

// Builds the redistribution measure described by a validated measure block:
// { family = "uniform" | "beta" | "pareto" | "induced", a, b, alpha,
//   mu = "gamma" | "exponential" | "pareto1", mu_params = {...} }.
RedistributionMeasure measure_from_config(const nlohmann::json& block);

// Builds the 1d marginal density named by `family` ("gamma", "exponential",
// "pareto1") with its parameter table.
Density1D density1d_from_config(const std::string& family,
                                const nlohmann::json& params,
                                const std::string& where);

} // namespace kinex
