#pragma once

#include "orthoplan/agents.hpp"
#include "orthoplan/orchestrator.hpp"
#include "orthoplan/scoring.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>

namespace orthoplan {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Flat view of a TOML document: "table.key" -> value. Supports the subset used by
/// orthoplan.toml: [table] headers, bare keys, strings, integers, floats, booleans
/// and # comments. Arrays, inline tables and multi-line strings are rejected.
using TomlValue = std::variant<bool, std::int64_t, double, std::string>;
std::map<std::string, TomlValue> parse_toml(const std::string& text);

struct SyntheticConfig {
    double mild_max_mm = 1.0;      // Mild crowding: (0.25, mild_max]
    double moderate_max_mm = 3.0;  // Moderate: (mild_max, moderate_max]
    double severe_max_mm = 6.0;    // Severe: (moderate_max, severe_max]
    double max_compensating_rotation_deg = 25.0;
    double open_bite_fraction = 0.25;
};

struct BenchmarkConfig {
    int workers = 0;  // 0 = hardware concurrency
    double heatmap_noise = 0.0;
    double presence_noise = 0.0;
    double presence_flip_prob = 0.0;
    SyntheticConfig synthetic;
};

struct ServiceConfig {
    std::string host = "0.0.0.0";
    int port = 8080;
    std::string data_dir = "orthoplan-data";
    std::string cors_origin = "*";  // empty disables CORS headers
    std::string heatmap_file;       // landmark heatmaps for uploaded clouds
};

struct AppConfig {
    FusionConfig fusion;
    ScoringConfig scoring;
    SegmentationOptions segmentation;
    SyntheticOracleSource::Options heatmaps;
    BenchmarkConfig benchmark;
    ServiceConfig service;

    /// Cross-field checks; throws ConfigError.
    void validate() const;
};

/// Unknown tables or keys are errors, so typos do not silently fall back to defaults.
AppConfig config_from_toml(const std::string& text);
AppConfig load_config(const std::string& path);

/// Path from --config, else $ORTHOPLAN_CONFIG, else defaults. Data dir from
/// $ORTHOPLAN_DATA_DIR overrides the file.
AppConfig resolve_config(const std::string& cli_path);

}  // namespace orthoplan
