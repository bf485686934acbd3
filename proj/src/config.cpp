#include "orthoplan/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace orthoplan {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(int line, const std::string& message) {
    throw ConfigError("config line " + std::to_string(line) + ": " + message);
}

bool is_bare_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-';
        if (!ok) return false;
    }
    return true;
}

// Removes a trailing comment, respecting double-quoted strings.
std::string strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_string && c == '\\') {
            ++i;
        } else if (c == '"') {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return std::string(line.substr(0, i));
        }
    }
    return std::string(line);
}

std::string parse_string(std::string_view v, int line) {
    if (v.size() < 2 || v.back() != '"') fail(line, "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        char c = v[i];
        if (c == '"') fail(line, "unexpected quote inside string");
        if (c == '\\') {
            if (i + 2 >= v.size()) fail(line, "dangling escape");
            c = v[++i];
            switch (c) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(line, std::string("unsupported escape \\") + c);
            }
            continue;
        }
        out += c;
    }
    return out;
}

TomlValue parse_value(const std::string& raw, int line) {
    if (raw.empty()) fail(line, "missing value");
    if (raw.front() == '"') return parse_string(raw, line);
    if (raw == "true") return true;
    if (raw == "false") return false;
    if (raw.front() == '[' || raw.front() == '{' || raw.front() == '\'') {
        fail(line, "arrays, inline tables and literal strings are not supported");
    }
    std::string digits;
    for (char c : raw) {
        if (c != '_') digits += c;
    }
    const char* first = digits.data();
    const char* last = digits.data() + digits.size();
    if (*first == '+') ++first;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" || digits == "nan";
    if (is_float) {
        double d = 0.0;
        const auto [ptr, ec] = std::from_chars(first, last, d);
        if (ec != std::errc() || ptr != last) fail(line, "invalid number '" + raw + "'");
        return d;
    }
    std::int64_t i = 0;
    const auto [ptr, ec] = std::from_chars(first, last, i);
    if (ec != std::errc() || ptr != last) fail(line, "invalid value '" + raw + "'");
    return i;
}

double as_double(const TomlValue& v, const std::string& key) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    throw ConfigError(key + ": expected a number");
}

int as_int(const TomlValue& v, const std::string& key) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<int>(*i);
    throw ConfigError(key + ": expected an integer");
}

std::uint64_t as_seed(const TomlValue& v, const std::string& key) {
    if (const auto* i = std::get_if<std::int64_t>(&v); i != nullptr && *i >= 0) return static_cast<std::uint64_t>(*i);
    throw ConfigError(key + ": expected a non-negative integer");
}

bool as_bool(const TomlValue& v, const std::string& key) {
    if (const auto* b = std::get_if<bool>(&v)) return *b;
    throw ConfigError(key + ": expected true or false");
}

std::string as_string(const TomlValue& v, const std::string& key) {
    if (const auto* s = std::get_if<std::string>(&v)) return *s;
    throw ConfigError(key + ": expected a string");
}

using Setter = std::function<void(AppConfig&, const TomlValue&, const std::string&)>;

template <typename Section>
Setter number_into(Section AppConfig::*section, double Section::*member) {
    return [=](AppConfig& c, const TomlValue& v, const std::string& k) { (c.*section).*member = as_double(v, k); };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"orchestrator.mode",
         [](AppConfig& c, const TomlValue& v, const std::string& k) {
             try {
                 c.fusion = parse_mode(as_string(v, k), c.fusion);
             } catch (const ConfigError&) {
                 throw;
             } catch (const std::invalid_argument& e) {
                 throw ConfigError(k + ": " + e.what());
             }
         }},
        {"orchestrator.w1", number_into(&AppConfig::fusion, &FusionConfig::w1)},
        {"orchestrator.w2", number_into(&AppConfig::fusion, &FusionConfig::w2)},
        {"orchestrator.threshold", number_into(&AppConfig::fusion, &FusionConfig::sequential_threshold)},
        {"orchestrator.boosted_w1", number_into(&AppConfig::fusion, &FusionConfig::boosted_w1)},

        {"scoring.over_engineering", number_into(&AppConfig::scoring, &ScoringConfig::over_engineering)},
        {"scoring.extrusion_critical_mm", number_into(&AppConfig::scoring, &ScoringConfig::extrusion_critical_mm)},
        {"scoring.molar_translation_mm", number_into(&AppConfig::scoring, &ScoringConfig::molar_translation_mm)},
        {"scoring.simultaneous_molars",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.simultaneous_molars = as_int(v, k); }},
        {"scoring.attachment_rotation_deg", number_into(&AppConfig::scoring, &ScoringConfig::attachment_rotation_deg)},
        {"scoring.attachment_extrusion_mm", number_into(&AppConfig::scoring, &ScoringConfig::attachment_extrusion_mm)},
        {"scoring.ipr_per_contact_mm", number_into(&AppConfig::scoring, &ScoringConfig::ipr_per_contact_mm)},
        {"scoring.occlusion_asymmetry_mm", number_into(&AppConfig::scoring, &ScoringConfig::occlusion_asymmetry_mm)},

        {"predictability.translation",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.eta.translation = as_double(v, k); }},
        {"predictability.torque",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.eta.torque = as_double(v, k); }},
        {"predictability.tip",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.eta.tip = as_double(v, k); }},
        {"predictability.rotation",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.eta.rotation = as_double(v, k); }},
        {"predictability.rotation_rounded",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.eta.rotation_rounded = as_double(v, k); }},

        {"staging.delta_trans_mm",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.staging.delta_trans_mm = as_double(v, k); }},
        {"staging.delta_rot_deg",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.staging.delta_rot_deg = as_double(v, k); }},
        {"staging.frames_per_aligner",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.staging.frames_per_aligner = as_int(v, k); }},
        {"staging.min_aligners",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.staging.min_aligners = as_int(v, k); }},
        {"staging.extrusion_start",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.staging.extrusion_start = as_double(v, k); }},
        {"staging.defer_vertical_only",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.staging.defer_vertical_only = as_bool(v, k); }},
        {"staging.count_over_engineered",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.scoring.staging.count_over_engineered = as_bool(v, k); }},

        {"segmentation.full_confidence_points", number_into(&AppConfig::segmentation, &SegmentationOptions::full_confidence_points)},
        {"segmentation.min_confidence", number_into(&AppConfig::segmentation, &SegmentationOptions::min_confidence)},
        {"segmentation.max_confidence", number_into(&AppConfig::segmentation, &SegmentationOptions::max_confidence)},
        {"segmentation.clustering_enabled",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.segmentation.clustering_enabled = as_bool(v, k); }},
        {"segmentation.min_clusters",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.segmentation.min_clusters = as_int(v, k); }},
        {"segmentation.kmeans_iterations",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.segmentation.kmeans_iterations = as_int(v, k); }},
        {"segmentation.seed",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.segmentation.seed = as_seed(v, k); }},

        {"heatmaps.sigma_mm", number_into(&AppConfig::heatmaps, &SyntheticOracleSource::Options::sigma_mm)},
        {"heatmaps.null_level_present", number_into(&AppConfig::heatmaps, &SyntheticOracleSource::Options::null_level_present)},
        {"heatmaps.null_level_absent", number_into(&AppConfig::heatmaps, &SyntheticOracleSource::Options::null_level_absent)},

        {"benchmark.workers",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.benchmark.workers = as_int(v, k); }},
        {"benchmark.heatmap_noise", number_into(&AppConfig::benchmark, &BenchmarkConfig::heatmap_noise)},
        {"benchmark.presence_noise", number_into(&AppConfig::benchmark, &BenchmarkConfig::presence_noise)},
        {"benchmark.presence_flip_prob", number_into(&AppConfig::benchmark, &BenchmarkConfig::presence_flip_prob)},
        {"benchmark.mild_max_mm",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.benchmark.synthetic.mild_max_mm = as_double(v, k); }},
        {"benchmark.moderate_max_mm",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.benchmark.synthetic.moderate_max_mm = as_double(v, k); }},
        {"benchmark.severe_max_mm",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.benchmark.synthetic.severe_max_mm = as_double(v, k); }},
        {"benchmark.max_compensating_rotation_deg",
         [](AppConfig& c, const TomlValue& v, const std::string& k) {
             c.benchmark.synthetic.max_compensating_rotation_deg = as_double(v, k);
         }},
        {"benchmark.open_bite_fraction",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.benchmark.synthetic.open_bite_fraction = as_double(v, k); }},

        {"service.host", [](AppConfig& c, const TomlValue& v, const std::string& k) { c.service.host = as_string(v, k); }},
        {"service.port", [](AppConfig& c, const TomlValue& v, const std::string& k) { c.service.port = as_int(v, k); }},
        {"service.data_dir",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.service.data_dir = as_string(v, k); }},
        {"service.heatmap_file",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.service.heatmap_file = as_string(v, k); }},
        {"service.cors_origin",
         [](AppConfig& c, const TomlValue& v, const std::string& k) { c.service.cors_origin = as_string(v, k); }},
    };
    return table;
}

}  // namespace

std::map<std::string, TomlValue> parse_toml(const std::string& text) {
    std::map<std::string, TomlValue> out;
    std::istringstream in(text);
    std::string raw;
    std::string table;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']' || line.starts_with("[[")) fail(line_no, "malformed table header");
            table = trim(std::string_view(line).substr(1, line.size() - 2));
            std::string_view rest = table;
            while (true) {
                const auto dot = rest.find('.');
                if (!is_bare_key(rest.substr(0, dot))) fail(line_no, "invalid table name '" + table + "'");
                if (dot == std::string_view::npos) break;
                rest.remove_prefix(dot + 1);
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(line_no, "expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (!is_bare_key(key)) fail(line_no, "invalid key '" + key + "'");
        const std::string full = table.empty() ? key : table + "." + key;
        if (out.contains(full)) fail(line_no, "duplicate key '" + full + "'");
        out.emplace(full, parse_value(trim(std::string_view(line).substr(eq + 1)), line_no));
    }
    return out;
}

void AppConfig::validate() const {
    try {
        fusion.validate();
        scoring.staging.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (!(scoring.over_engineering > 0.0)) throw ConfigError("scoring.over_engineering must be positive");
    if (scoring.simultaneous_molars < 1) throw ConfigError("scoring.simultaneous_molars must be >= 1");
    if (!(scoring.occlusion_asymmetry_mm > 0.0)) throw ConfigError("scoring.occlusion_asymmetry_mm must be positive");
    const auto& s = benchmark.synthetic;
    if (!(0.25 < s.mild_max_mm && s.mild_max_mm < s.moderate_max_mm && s.moderate_max_mm < s.severe_max_mm)) {
        throw ConfigError("crowding bands must satisfy 0.25 < mild < moderate < severe");
    }
    if (!(s.open_bite_fraction >= 0.0 && s.open_bite_fraction <= 1.0)) {
        throw ConfigError("benchmark.open_bite_fraction must lie in [0, 1]");
    }
    if (benchmark.workers < 0) throw ConfigError("benchmark.workers must be >= 0");
    if (service.port < 0 || service.port > 65535) throw ConfigError("service.port out of range");
}

AppConfig config_from_toml(const std::string& text) {
    AppConfig cfg;
    for (const auto& [key, value] : parse_toml(text)) {
        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
        it->second(cfg, value, key);
    }
    cfg.scoring.staging.over_engineering = cfg.scoring.over_engineering;
    cfg.validate();
    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_toml(buf.str());
}

AppConfig resolve_config(const std::string& cli_path) {
    std::string path = cli_path;
    if (path.empty()) {
        if (const char* env = std::getenv("ORTHOPLAN_CONFIG"); env != nullptr) path = env;
    }
    AppConfig cfg = path.empty() ? AppConfig{} : load_config(path);
    if (const char* dir = std::getenv("ORTHOPLAN_DATA_DIR"); dir != nullptr && *dir != '\0') cfg.service.data_dir = dir;
    return cfg;
}

}  // namespace orthoplan
