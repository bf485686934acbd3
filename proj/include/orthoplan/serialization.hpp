#pragma once

// JSON documents exchanged by the CLI and the REST service. Every top-level
// document carries "schema_version"; readers reject other versions.
//
//   plan   {schema_version, movements: [{fdi, tx_mm, ty_mm, tz_mm, rx_deg, ry_deg, rz_deg}]}
//   arch   {schema_version, arch, teeth: [{fdi, present, confidence, degraded,
//           centroid: [x,y,z], orientation_wxyz: [w,x,y,z], extents: [a,b,c],
//           landmarks: [{group, position}]}]}
//   cloud  {schema_version, arch, points: [[x,y,z], ...], labels?: [fdi, ...]}
//   score  {schema_version, sub_scores: {...}, composite_raw, composite, grade,
//           findings: [{severity, code, fdi|null, message, principle|null}], v1_score}
//   frames {schema_version, aligners, frames_per_aligner, summary: {...},
//           frames: [{index, t, poses: {"<fdi>": {centroid, orientation_wxyz}}}]}

#include "orthoplan/orchestrator.hpp"
#include "orthoplan/scoring.hpp"
#include "orthoplan/staging.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>

namespace orthoplan {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// A document that does not match its schema. `path` points at the offending field.
class SchemaError : public std::invalid_argument {
public:
    SchemaError(std::string path, const std::string& message)
        : std::invalid_argument(path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

Json to_json(const MovementPlan& plan);
MovementPlan plan_from_json(const Json& doc);

Json to_json(const ArchState& arch);
ArchState arch_from_json(const Json& doc);

Json to_json(const PointCloud& cloud);
PointCloud cloud_from_json(const Json& doc);

Json to_json(const Finding& finding);
Json to_json(const TreatmentScore& score);
TreatmentScore score_from_json(const Json& doc);

Json to_json(const CrowdingMetadata& crowding);
CrowdingMetadata crowding_from_json(const Json& doc);

Json to_json(const StagingSummary& summary);
Json to_json(const FrameSequence& frames);

Json to_json(const Provenance& provenance);

Json limits_table_json();

/// Reads a whole file as JSON. Throws SchemaError on malformed input and
/// std::runtime_error when the file cannot be read.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);

}  // namespace orthoplan
