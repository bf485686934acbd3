#include "orthoplan/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace orthoplan {

namespace {

std::string at_index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }
std::string at_key(const std::string& path, std::string_view key) { return path + "." + std::string(key); }

void require_object(const Json& v, const std::string& path) {
    if (!v.is_object()) throw SchemaError(path, "expected an object");
}

const Json& field(const Json& obj, std::string_view key, const std::string& path) {
    require_object(obj, path);
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(at_key(path, key), "required field is missing");
    return *it;
}

const Json* optional_field(const Json& obj, std::string_view key) {
    const auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw SchemaError(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw SchemaError(path, "number must be finite");
    return d;
}

int integer(const Json& v, const std::string& path) {
    if (!v.is_number_integer()) throw SchemaError(path, "expected an integer");
    return v.get<int>();
}

bool boolean(const Json& v, const std::string& path) {
    if (!v.is_boolean()) throw SchemaError(path, "expected true or false");
    return v.get<bool>();
}

std::string text(const Json& v, const std::string& path) {
    if (!v.is_string()) throw SchemaError(path, "expected a string");
    return v.get<std::string>();
}

const Json& array(const Json& v, const std::string& path) {
    if (!v.is_array()) throw SchemaError(path, "expected an array");
    return v;
}

std::vector<double> numbers(const Json& v, const std::string& path, std::size_t expected) {
    array(v, path);
    if (v.size() != expected) {
        throw SchemaError(path, "expected " + std::to_string(expected) + " numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], at_index(path, i)));
    return out;
}

Vec3 vec3(const Json& v, const std::string& path) {
    const auto n = numbers(v, path, 3);
    return {n[0], n[1], n[2]};
}

Json json_vec(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Json json_quat(const UnitQuaternion& q) {
    const auto a = q.wxyz();
    return Json::array({a[0], a[1], a[2], a[3]});
}

UnitQuaternion quat(const Json& v, const std::string& path) {
    const auto n = numbers(v, path, 4);
    try {
        return UnitQuaternion::from_wxyz(n[0], n[1], n[2], n[3]);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path, e.what());
    }
}

FdiTooth tooth(const Json& v, const std::string& path) {
    const int code = integer(v, path);
    if (!FdiTooth::is_valid(code)) throw SchemaError(path, "not an FDI permanent tooth: " + std::to_string(code));
    return FdiTooth(code);
}

Arch arch_field(const Json& v, const std::string& path) {
    try {
        return parse_arch(text(v, path));
    } catch (const SchemaError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SchemaError(path, e.what());
    }
}

void check_version(const Json& doc, const std::string& path) {
    const int v = integer(field(doc, "schema_version", path), at_key(path, "schema_version"));
    if (v != kSchemaVersion) {
        throw SchemaError(at_key(path, "schema_version"), "unsupported version " + std::to_string(v));
    }
}

Json versioned(Json body) {
    Json doc = {{"schema_version", kSchemaVersion}};
    doc.update(body);
    return doc;
}

constexpr std::array<std::string_view, 6> kMovementKeys{"tx_mm", "ty_mm", "tz_mm", "rx_deg", "ry_deg", "rz_deg"};

Json sub_scores_json(const SubScores& s) {
    return {{"bio", s.bio},
            {"staging", s.staging},
            {"attachments", s.attachments},
            {"ipr", s.ipr},
            {"occlusion", s.occlusion},
            {"predictability", s.predictability}};
}

Json limits_json(const MovementLimits& l) {
    return {{"tx_md_mm", l.tx_md_mm},         {"ty_bl_mm", l.ty_bl_mm},
            {"tz_intrusion_mm", l.tz_intrusion_mm}, {"tz_extrusion_mm", l.tz_extrusion_mm},
            {"rx_torque_deg", l.rx_torque_deg}, {"ry_tip_deg", l.ry_tip_deg},
            {"rz_rotation_deg", l.rz_rotation_deg}, {"eta_intrusion", l.eta_intrusion},
            {"eta_extrusion", l.eta_extrusion}};
}

double millis(std::chrono::nanoseconds ns) { return static_cast<double>(ns.count()) / 1e6; }

}  // namespace

Json to_json(const MovementPlan& plan) {
    Json movements = Json::array();
    for (const auto& [fdi, m] : plan) {
        movements.push_back({{"fdi", fdi.code()},
                             {"tx_mm", m.tx},
                             {"ty_mm", m.ty},
                             {"tz_mm", m.tz},
                             {"rx_deg", m.rx},
                             {"ry_deg", m.ry},
                             {"rz_deg", m.rz}});
    }
    return versioned({{"movements", movements}});
}

MovementPlan plan_from_json(const Json& doc) {
    const std::string root = "plan";
    check_version(doc, root);
    const Json& list = array(field(doc, "movements", root), at_key(root, "movements"));
    MovementPlan plan;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = at_key(root, "movements") + "[" + std::to_string(i) + "]";
        const Json& entry = list[i];
        require_object(entry, path);
        for (const auto& [key, value] : entry.items()) {
            if (key != "fdi" && std::find(kMovementKeys.begin(), kMovementKeys.end(), key) == kMovementKeys.end()) {
                throw SchemaError(at_key(path, key), "unknown field");
            }
        }
        const FdiTooth fdi = tooth(field(entry, "fdi", path), at_key(path, "fdi"));
        std::array<double, 6> v{};
        for (std::size_t k = 0; k < kMovementKeys.size(); ++k) {
            if (const Json* f = optional_field(entry, kMovementKeys[k])) v[k] = number(*f, at_key(path, kMovementKeys[k]));
        }
        if (plan.find(fdi) != nullptr) throw SchemaError(path, "duplicate movement for tooth " + std::to_string(fdi.code()));
        plan.add(fdi, {v[0], v[1], v[2], v[3], v[4], v[5]});
    }
    return plan;
}

Json to_json(const ArchState& arch) {
    Json teeth = Json::array();
    for (const auto& [fdi, s] : arch.teeth()) {
        Json landmarks = Json::array();
        for (const Landmark& lm : s.landmarks) {
            landmarks.push_back({{"group", std::string(to_string(lm.group))}, {"position", json_vec(lm.position)}});
        }
        teeth.push_back({{"fdi", fdi.code()},
                         {"present", s.present},
                         {"confidence", s.confidence},
                         {"degraded", s.degraded},
                         {"centroid", json_vec(s.centroid)},
                         {"orientation_wxyz", json_quat(s.orientation)},
                         {"extents", Json::array({s.extents[0], s.extents[1], s.extents[2]})},
                         {"landmarks", landmarks}});
    }
    return versioned({{"arch", std::string(to_string(arch.arch()))}, {"teeth", teeth}});
}

ArchState arch_from_json(const Json& doc) {
    const std::string root = "arch";
    check_version(doc, root);
    ArchState arch(arch_field(field(doc, "arch", root), at_key(root, "arch")));
    const Json& list = array(field(doc, "teeth", root), at_key(root, "teeth"));
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = at_index(at_key(root, "teeth"), i);
        const Json& t = list[i];
        ToothState s{.fdi = tooth(field(t, "fdi", path), at_key(path, "fdi")),
                     .centroid = vec3(field(t, "centroid", path), at_key(path, "centroid")),
                     .orientation = {},
                     .landmarks = {}};
        if (arch.find(s.fdi) != nullptr) throw SchemaError(path, "duplicate tooth");
        if (const Json* q = optional_field(t, "orientation_wxyz")) s.orientation = quat(*q, at_key(path, "orientation_wxyz"));
        if (const Json* e = optional_field(t, "extents")) {
            const auto n = numbers(*e, at_key(path, "extents"), 3);
            s.extents = {n[0], n[1], n[2]};
        }
        s.confidence = number(field(t, "confidence", path), at_key(path, "confidence"));
        s.present = boolean(field(t, "present", path), at_key(path, "present"));
        if (const Json* d = optional_field(t, "degraded")) s.degraded = boolean(*d, at_key(path, "degraded"));
        if (const Json* lms = optional_field(t, "landmarks")) {
            array(*lms, at_key(path, "landmarks"));
            for (std::size_t j = 0; j < lms->size(); ++j) {
                const std::string lp = at_index(at_key(path, "landmarks"), j);
                const std::string group = text(field((*lms)[j], "group", lp), at_key(lp, "group"));
                try {
                    s.landmarks.push_back({parse_landmark_group(group),
                                           vec3(field((*lms)[j], "position", lp), at_key(lp, "position"))});
                } catch (const SchemaError&) {
                    throw;
                } catch (const std::invalid_argument& e) {
                    throw SchemaError(at_key(lp, "group"), e.what());
                }
            }
        }
        try {
            arch.put(std::move(s));
        } catch (const std::invalid_argument& e) {
            throw SchemaError(path, e.what());
        }
    }
    return arch;
}

Json to_json(const PointCloud& cloud) {
    Json points = Json::array();
    for (const Vec3& p : cloud.points) points.push_back(json_vec(p));
    Json doc = versioned({{"arch", std::string(to_string(cloud.arch))}, {"points", points}});
    if (cloud.labels) {
        Json labels = Json::array();
        for (const FdiTooth fdi : *cloud.labels) labels.push_back(fdi.code());
        doc["labels"] = labels;
    }
    return doc;
}

PointCloud cloud_from_json(const Json& doc) {
    const std::string root = "cloud";
    check_version(doc, root);
    PointCloud cloud;
    cloud.arch = arch_field(field(doc, "arch", root), at_key(root, "arch"));
    const Json& points = array(field(doc, "points", root), at_key(root, "points"));
    cloud.points.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) cloud.points.push_back(vec3(points[i], at_index(at_key(root, "points"), i)));
    if (const Json* labels = optional_field(doc, "labels")) {
        array(*labels, at_key(root, "labels"));
        std::vector<FdiTooth> out;
        for (std::size_t i = 0; i < labels->size(); ++i) out.push_back(tooth((*labels)[i], at_index(at_key(root, "labels"), i)));
        cloud.labels = std::move(out);
    }
    try {
        cloud.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(root, e.what());
    }
    return cloud;
}

Json to_json(const Finding& f) {
    return {{"severity", std::string(to_string(f.severity))},
            {"code", f.code},
            {"fdi", f.fdi ? Json(f.fdi->code()) : Json(nullptr)},
            {"message", f.message},
            {"principle", f.principle ? Json(*f.principle) : Json(nullptr)}};
}

Json to_json(const TreatmentScore& score) {
    Json findings = Json::array();
    for (const Finding& f : score.findings) findings.push_back(to_json(f));
    return versioned({{"sub_scores", sub_scores_json(score.sub)},
                      {"composite_raw", score.composite_raw},
                      {"composite", score.composite},
                      {"grade", std::string(to_string(score.grade))},
                      {"critical_count", score.count(Severity::Critical)},
                      {"warning_count", score.count(Severity::Warning)},
                      {"findings", findings},
                      {"v1_score", score.v1_score}});
}

TreatmentScore score_from_json(const Json& doc) {
    const std::string root = "score";
    check_version(doc, root);
    TreatmentScore score;
    const Json& sub = field(doc, "sub_scores", root);
    const std::string sp = at_key(root, "sub_scores");
    score.sub = {number(field(sub, "bio", sp), at_key(sp, "bio")),
                 number(field(sub, "staging", sp), at_key(sp, "staging")),
                 number(field(sub, "attachments", sp), at_key(sp, "attachments")),
                 number(field(sub, "ipr", sp), at_key(sp, "ipr")),
                 number(field(sub, "occlusion", sp), at_key(sp, "occlusion")),
                 number(field(sub, "predictability", sp), at_key(sp, "predictability"))};
    score.composite_raw = number(field(doc, "composite_raw", root), at_key(root, "composite_raw"));
    score.composite = number(field(doc, "composite", root), at_key(root, "composite"));
    score.v1_score = number(field(doc, "v1_score", root), at_key(root, "v1_score"));
    try {
        score.grade = parse_grade(text(field(doc, "grade", root), at_key(root, "grade")));
    } catch (const SchemaError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw SchemaError(at_key(root, "grade"), e.what());
    }
    const Json& list = array(field(doc, "findings", root), at_key(root, "findings"));
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = at_index(at_key(root, "findings"), i);
        const Json& f = list[i];
        Finding finding{Severity::Info, text(field(f, "code", path), at_key(path, "code")), std::nullopt,
                        text(field(f, "message", path), at_key(path, "message")), std::nullopt};
        try {
            finding.severity = parse_severity(text(field(f, "severity", path), at_key(path, "severity")));
        } catch (const SchemaError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw SchemaError(at_key(path, "severity"), e.what());
        }
        if (const Json* fdi = optional_field(f, "fdi")) finding.fdi = tooth(*fdi, at_key(path, "fdi"));
        if (const Json* p = optional_field(f, "principle")) finding.principle = integer(*p, at_key(path, "principle"));
        score.findings.push_back(std::move(finding));
    }
    return score;
}

Json to_json(const CrowdingMetadata& crowding) {
    return versioned({{"contact_overlap_mm", crowding.contact_overlap_mm}});
}

CrowdingMetadata crowding_from_json(const Json& doc) {
    const std::string root = "crowding";
    check_version(doc, root);
    const Json& list = array(field(doc, "contact_overlap_mm", root), at_key(root, "contact_overlap_mm"));
    CrowdingMetadata out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const double v = number(list[i], at_index(at_key(root, "contact_overlap_mm"), i));
        if (v < 0.0) throw SchemaError(at_index(at_key(root, "contact_overlap_mm"), i), "overlap must be >= 0");
        out.contact_overlap_mm.push_back(v);
    }
    return out;
}

Json to_json(const StagingSummary& s) {
    Json deferred = Json::array();
    for (const FdiTooth fdi : s.deferred_teeth) deferred.push_back(fdi.code());
    return {{"aligner_count", s.aligner_count},
            {"frame_count", s.frame_count},
            {"stage_max_displacement_mm", s.stage_max_displacement_mm},
            {"stage_max_rotation_deg", s.stage_max_rotation_deg},
            {"deferred_teeth", deferred}};
}

Json to_json(const FrameSequence& seq) {
    Json frames = Json::array();
    for (const TreatmentFrame& frame : seq.frames) {
        Json poses = Json::object();
        for (const auto& [fdi, pose] : frame.poses) {
            poses[std::to_string(fdi.code())] = {{"centroid", json_vec(pose.centroid)},
                                                 {"orientation_wxyz", json_quat(pose.orientation)}};
        }
        frames.push_back({{"index", frame.index}, {"t", frame.t}, {"poses", poses}});
    }
    return versioned({{"aligners", seq.aligners},
                      {"frames_per_aligner", seq.frames_per_aligner},
                      {"summary", to_json(seq.summary)},
                      {"frames", frames}});
}

Json to_json(const Provenance& p) {
    Json weights = Json::array();
    for (const auto& [fdi, w] : p.weights) weights.push_back({{"fdi", fdi.code()}, {"w1", w.w1}, {"w2", w.w2}});
    Json degraded = Json::array();
    for (const FdiTooth fdi : p.degraded) degraded.push_back(fdi.code());
    return {{"mode", p.mode},
            {"agents_run", p.agents_run},
            {"agent1_invoked", p.agent1_invoked},
            {"agent2_invoked", p.agent2_invoked},
            {"weights", weights},
            {"degraded_teeth", degraded},
            {"notes", p.notes},
            {"agent1_ms", millis(p.agent1_elapsed)},
            {"agent2_ms", millis(p.agent2_elapsed)},
            {"total_ms", millis(p.total_elapsed)}};
}

Json limits_table_json() {
    Json types = Json::object();
    for (ToothType t : {ToothType::Incisor, ToothType::Canine, ToothType::Premolar, ToothType::Molar}) {
        types[std::string(to_string(t))] = limits_json(limits_for(t));
    }
    const PredictabilityTable eta;
    const StagingConfig staging;
    return versioned({{"tooth_types", types},
                      {"predictability",
                       {{"translation", eta.translation},
                        {"intrusion", eta.intrusion},
                        {"extrusion", eta.extrusion},
                        {"torque", eta.torque},
                        {"tip", eta.tip},
                        {"rotation", eta.rotation},
                        {"rotation_rounded", eta.rotation_rounded}}},
                      {"over_engineering", kOverEngineering},
                      {"per_aligner", {{"translation_mm", staging.delta_trans_mm}, {"rotation_deg", staging.delta_rot_deg}}}});
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw SchemaError(path, std::string("malformed JSON: ") + e.what());
    }
}

void write_json_file(const std::string& path, const Json& doc) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace orthoplan
