#pragma once

// Synthetic crowding scenarios and the evaluation harness that runs them through
// every orchestrator mode.
//
// Arch curve: y = depth * (1 - (x / half_width)^2) in the per-arch frame (x patient
// left, y anterior, z apical). Teeth are laid along the curve by arc length using
// typical mesiodistal widths and rendered as ellipsoidal point clusters. Crowding
// displaces the ideal poses; the target plan moves every present tooth back.
// Plan translations are expressed in the arch frame, rotations in the tooth frame.

#include "orthoplan/config.hpp"
#include "orthoplan/orchestrator.hpp"
#include "orthoplan/scoring.hpp"
#include "orthoplan/serialization.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orthoplan {

enum class Archetype { Tapered, Ovoid, Square, NarrowV };
std::string_view to_string(Archetype a);
Archetype parse_archetype(std::string_view text);

enum class CrowdingSeverity { Mild, Moderate, Severe };
std::string_view to_string(CrowdingSeverity s);
CrowdingSeverity parse_severity_band(std::string_view text);

struct ArchCurve {
    double half_width_mm;
    double depth_mm;
};
ArchCurve arch_curve(Archetype a);

struct ScenarioSpec {
    Archetype archetype = Archetype::Ovoid;
    CrowdingSeverity severity = CrowdingSeverity::Mild;
    int missing_count = 0;  // 0..2
    std::uint64_t seed = 0;
    Arch arch = Arch::Upper;

    bool operator==(const ScenarioSpec&) const = default;
};

struct SyntheticCase {
    ScenarioSpec spec;
    PointCloud cloud;       // labeled
    ArchState ground_truth; // crowded (current) poses, absent teeth included
    ArchState ideal;        // where each present tooth should end up
    MovementPlan target_plan;
    CrowdingMetadata crowding;
    bool open_bite = false;
};

/// Throws std::invalid_argument for missing_count outside 0..2.
SyntheticCase generate_scenario(const ScenarioSpec& spec, const SyntheticConfig& cfg = {});

/// Cycles the 4 x 3 x 3 grid (archetype, severity, missing count) round-robin. Each
/// spec gets its own seed derived from master_seed; the arch alternates per cycle.
std::vector<ScenarioSpec> enumerate_suite(int n, std::uint64_t master_seed);

struct ScenarioRow {
    std::size_t index = 0;
    std::string mode;
    bool ok = false;
    std::string error;
    double composite = 0.0;
    Grade grade = Grade::F;
    bool feasible = false;
    std::size_t critical = 0;
    std::size_t warnings = 0;
    double v1_score = 0.0;
    int aligners = 0;
    double centroid_error_mm = 0.0;  // mean over teeth present in both truth and estimate
    double seconds = 0.0;
};

struct ModeStats {
    std::string mode;
    std::size_t n = 0;
    std::size_t succeeded = 0;
    double mean_quality = 0.0;
    double sd_quality = 0.0;  // population
    double feasibility = 0.0;
    double mean_v1_score = 0.0;
    double mean_aligners = 0.0;
    double mean_centroid_error_mm = 0.0;
    double mean_seconds = 0.0;
    double sd_seconds = 0.0;
};

struct BenchmarkReport {
    std::size_t n = 0;
    std::optional<std::uint64_t> master_seed;
    std::vector<ScenarioSpec> suite;
    std::vector<ModeStats> modes;
    std::vector<ScenarioRow> rows;  // scenario-major, then mode order
    double total_seconds = 0.0;
};

/// Feasible: no Critical findings and composite >= 60.
bool is_feasible(const TreatmentScore& score);

struct BenchmarkOptions {
    ScoringConfig scoring;
    SegmentationOptions segmentation;
    SyntheticOracleSource::Options heatmaps;  // seed is replaced per scenario
    SyntheticConfig synthetic;
    int workers = 0;  // 0 = hardware concurrency
    // Replaces generate_scenario, e.g. to build special-purpose suites.
    std::function<SyntheticCase(const ScenarioSpec&)> generator;
};

BenchmarkOptions benchmark_options(const AppConfig& cfg);

/// Throws std::invalid_argument for an empty suite or mode list.
BenchmarkReport run_benchmark(const std::vector<ScenarioSpec>& suite, const std::vector<FusionConfig>& modes,
                              const BenchmarkOptions& options = {});

/// Wall-clock figures live under "timing" so that dropping that key leaves a
/// document that depends only on the suite, modes and configuration.
Json to_json(const BenchmarkReport& report);
std::string report_csv(const BenchmarkReport& report);

}  // namespace orthoplan
