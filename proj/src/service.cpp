#include "orthoplan/service.hpp"

#include "orthoplan/presets.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <sstream>

namespace orthoplan {

namespace {

class UnavailableHeatmapSource final : public HeatmapSource {
public:
    HeatmapPrediction predict(const PointCloud& /*cloud*/) const override {
        throw AgentUnavailable("no landmark heatmap model is configured");
    }
};

ApiResponse error(int status, const std::string& code, const std::string& message, Json extra = Json::object()) {
    Json body = {{"code", code}, {"message", message}};
    body.update(extra);
    return {status, {{"error", body}}};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream in(path);
    while (std::getline(in, part, '/')) {
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

Json parse_body(const std::string& body) {
    if (body.empty()) throw SchemaError("body", "request body is empty");
    try {
        return Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw SchemaError("body", std::string("malformed JSON: ") + e.what());
    }
}

Json notes_json(const std::vector<PlanNote>& notes) {
    Json out = Json::array();
    for (const PlanNote& n : notes) {
        out.push_back({{"fdi", n.fdi ? Json(n.fdi->code()) : Json(nullptr)}, {"message", n.message}});
    }
    return out;
}

Json inputs_hash(const Json& arch, const Json& plan, const Json& crowding) {
    return content_hash({{"arch", arch}, {"plan", plan}, {"crowding", crowding}});
}

Json summary_of(const Json& record) {
    const Json& score = record["score"];
    return {{"id", record["id"]},
            {"label", record.value("label", "")},
            {"source", record.value("source", "")},
            {"version", record["version"]},
            {"grade", score["grade"]},
            {"composite", score["composite"]},
            {"critical_count", score.value("critical_count", 0)},
            {"updated_at", record["updated_at"]}};
}

}  // namespace

std::shared_ptr<const HeatmapSource> service_heatmap_source(const AppConfig& cfg) {
    if (!cfg.service.heatmap_file.empty()) return std::make_shared<FileHeatmapSource>(cfg.service.heatmap_file);
    return std::make_shared<UnavailableHeatmapSource>();
}

ServiceApi::ServiceApi(AppConfig cfg, std::shared_ptr<PatientStore> store,
                       std::shared_ptr<const Orchestrator> orchestrator)
    : cfg_(std::move(cfg)), store_(std::move(store)), orchestrator_(std::move(orchestrator)) {
    if (!store_) throw std::invalid_argument("service needs a patient store");
    if (!orchestrator_) throw std::invalid_argument("service needs an orchestrator");
    cfg_.validate();
}

ApiResponse ServiceApi::handle(const ApiRequest& request) {
    try {
        const auto parts = split_path(request.path);
        const bool get = request.method == "GET";
        const bool post = request.method == "POST";
        if (parts.size() >= 2 && parts[0] == "api") {
            if (parts[1] == "patients") {
                if (parts.size() == 2 && get) return list_patients();
                if (parts.size() == 2 && post) return create_patient(parse_body(request.body));
                if (parts.size() == 3 && get) return get_patient(parts[2]);
                if (parts.size() == 4 && parts[3] == "frames" && get) return get_frames(parts[2]);
                if (parts.size() == 4 && parts[3] == "rescore" && post) return rescore(parts[2], parse_body(request.body));
            }
            if (parts.size() == 2 && parts[1] == "demo" && get) return demo(request.query);
            if (parts.size() == 2 && parts[1] == "limits" && get) return {200, limits_table_json()};
            if (parts.size() == 3 && parts[1] == "training" && parts[2] == "status" && get) return status();
        }
        return error(404, "route_not_found", request.method + " " + request.path + " is not an API route");
    } catch (const SchemaError& e) {
        return error(422, "schema_violation", e.what(), {{"path", e.path()}});
    } catch (const PlanValidationError& e) {
        return error(422, "plan_invalid", e.what(), {{"notes", notes_json(e.notes())}});
    } catch (const PipelineError& e) {
        return error(500, "pipeline_error", e.what());
    } catch (const std::exception& e) {
        return error(500, "internal_error", e.what());
    }
}

ServiceApi::Evaluation ServiceApi::evaluate(const ArchState& arch, const MovementPlan& plan,
                                            const std::optional<CrowdingMetadata>& crowding) const {
    const TreatmentScore score = score_plan(plan, arch, crowding, cfg_.scoring);
    const FrameSequence frames = generate_frames(arch, plan, cfg_.scoring.staging);
    return {to_json(score), to_json(frames), to_json(frames.summary)};
}

ApiResponse ServiceApi::list_patients() const {
    Json list = Json::array();
    for (const Json& record : store_->list()) list.push_back(summary_of(record));
    return {200, {{"schema_version", kSchemaVersion}, {"patients", list}}};
}

ApiResponse ServiceApi::get_patient(const std::string& id) const {
    auto record = store_->get(id);
    if (!record) return error(404, "patient_not_found", "no patient with id '" + id + "'");
    return {200, *record};
}

ApiResponse ServiceApi::get_frames(const std::string& id) const {
    auto frames = store_->frames(id);
    if (!frames) return error(404, "patient_not_found", "no patient with id '" + id + "'");
    return {200, *frames};
}

ApiResponse ServiceApi::create_patient(const Json& body) {
    if (!body.is_object()) throw SchemaError("body", "expected an object");
    const bool has_arch = body.contains("arch");
    const bool has_cloud = body.contains("cloud");
    if (has_arch == has_cloud) throw SchemaError("body", "exactly one of 'arch' or 'cloud' is required");
    if (!body.contains("plan")) throw SchemaError("body.plan", "required field is missing");
    const MovementPlan plan = plan_from_json(body["plan"]);
    std::optional<CrowdingMetadata> crowding;
    if (body.contains("crowding") && !body["crowding"].is_null()) crowding = crowding_from_json(body["crowding"]);
    std::string label;
    if (body.contains("label")) {
        if (!body["label"].is_string()) throw SchemaError("body.label", "expected a string");
        label = body["label"].get<std::string>();
    }

    Json provenance = nullptr;
    ArchState arch;
    if (has_arch) {
        arch = arch_from_json(body["arch"]);
    } else {
        const PointCloud cloud = cloud_from_json(body["cloud"]);
        const PipelineResult result = orchestrator_->run(cfg_.fusion, cloud);
        ++counters_.pipeline_runs;
        if (result.provenance.agent1_invoked) ++counters_.agent1_invocations;
        if (result.provenance.agent2_invoked) ++counters_.agent2_invocations;
        arch = result.arch;
        provenance = to_json(result.provenance);
    }

    const Evaluation eval = evaluate(arch, plan, crowding);
    Json record = {{"schema_version", kSchemaVersion},
                   {"label", label},
                   {"source", has_arch ? "upload" : "pipeline"},
                   {"arch", to_json(arch)},
                   {"plan", to_json(plan)},
                   {"crowding", crowding ? to_json(*crowding) : Json(nullptr)},
                   {"score", eval.score},
                   {"staging", eval.summary},
                   {"provenance", provenance}};
    record["content_hash"] = inputs_hash(record["arch"], record["plan"], record["crowding"]);
    return {201, store_->create(std::move(record), eval.frames)};
}

ApiResponse ServiceApi::rescore(const std::string& id, const Json& body) {
    auto current = store_->get(id);
    if (!current) return error(404, "patient_not_found", "no patient with id '" + id + "'");
    if (!body.is_object()) throw SchemaError("body", "expected an object");
    if (!body.contains("plan")) throw SchemaError("body.plan", "required field is missing");
    const MovementPlan plan = plan_from_json(body["plan"]);
    int expected = (*current)["version"].get<int>();
    if (body.contains("version") && !body["version"].is_null()) {
        if (!body["version"].is_number_integer()) throw SchemaError("body.version", "expected an integer");
        expected = body["version"].get<int>();
        if (expected != (*current)["version"].get<int>()) {
            return error(409, "version_conflict", "record is at version " + (*current)["version"].dump(),
                         {{"current_version", (*current)["version"]}});
        }
    }

    const ArchState arch = arch_from_json((*current)["arch"]);
    std::optional<CrowdingMetadata> crowding;
    if (!(*current)["crowding"].is_null()) crowding = crowding_from_json((*current)["crowding"]);
    const Json plan_json = to_json(plan);
    const Json hash = inputs_hash((*current)["arch"], plan_json, (*current)["crowding"]);

    Json frames;
    PatientStore::Update update{PatientStore::Outcome::Unchanged, *current};
    if (hash != (*current)["content_hash"]) {
        const Evaluation eval = evaluate(arch, plan, crowding);
        frames = eval.frames;
        update = store_->update(id, expected, {{"plan", plan_json}, {"score", eval.score}, {"staging", eval.summary},
                                               {"content_hash", hash}},
                                frames);
    }
    switch (update.outcome) {
        case PatientStore::Outcome::NotFound:
            return error(404, "patient_not_found", "no patient with id '" + id + "'");
        case PatientStore::Outcome::Conflict:
            return error(409, "version_conflict", "record changed concurrently; now at version " +
                                                      update.record["version"].dump(),
                         {{"current_version", update.record["version"]}});
        case PatientStore::Outcome::Unchanged:
            frames = *store_->frames(id);
            break;
        case PatientStore::Outcome::Written:
            break;
    }
    const Json& record = update.record;
    return {200,
            {{"schema_version", kSchemaVersion},
             {"id", id},
             {"version", record["version"]},
             {"content_hash", record["content_hash"]},
             {"changed", update.outcome == PatientStore::Outcome::Written},
             {"score", record["score"]},
             {"staging", record["staging"]},
             {"frames_ref", record["frames_ref"]},
             {"frames", frames}}};
}

ApiResponse ServiceApi::demo(const std::map<std::string, std::string>& query) {
    const auto it = query.find("case");
    if (it == query.end() || it->second.empty()) {
        Json cases = Json::array();
        for (const std::string& key : preset_keys()) cases.push_back(key);
        return {200, {{"schema_version", kSchemaVersion}, {"cases", cases}}};
    }
    if (!is_preset(it->second)) return error(404, "preset_not_found", "no preset case '" + it->second + "'");

    const PresetCase preset = load_preset(it->second);
    const std::string id = "demo-" + preset.key;
    const Json arch_json = to_json(preset.data.ground_truth);
    const Json plan_json = to_json(preset.data.target_plan);
    const Json crowding_json = to_json(preset.data.crowding);
    const Json hash = inputs_hash(arch_json, plan_json, crowding_json);
    if (auto existing = store_->get(id); existing && (*existing)["content_hash"] == hash) return {200, *existing};

    const Evaluation eval = evaluate(preset.data.ground_truth, preset.data.target_plan, preset.data.crowding);
    Json record = {{"schema_version", kSchemaVersion},
                   {"label", preset.label},
                   {"source", "demo"},
                   {"preset", preset.key},
                   {"arch", arch_json},
                   {"plan", plan_json},
                   {"crowding", crowding_json},
                   {"score", eval.score},
                   {"staging", eval.summary},
                   {"provenance", nullptr},
                   {"content_hash", hash}};
    return {200, store_->upsert(id, std::move(record), eval.frames).record};
}

ApiResponse ServiceApi::status() const {
    const FusionConfig& f = cfg_.fusion;
    const StagingConfig& s = cfg_.scoring.staging;
    Json presets = Json::array();
    for (const std::string& key : preset_keys()) presets.push_back(key);
    return {200,
            {{"schema_version", kSchemaVersion},
             {"service_version", kServiceVersion},
             {"status", "ready"},
             {"training",
              {{"supported", false},
               {"description", "inference-only pipeline; estimators are not trained by this service"}}},
             {"orchestrator",
              {{"mode", mode_name(f)},
               {"w1", f.w1},
               {"w2", f.w2},
               {"threshold", f.sequential_threshold},
               {"boosted_w1", f.boosted_w1}}},
             {"staging",
              {{"delta_trans_mm", s.delta_trans_mm},
               {"delta_rot_deg", s.delta_rot_deg},
               {"frames_per_aligner", s.frames_per_aligner},
               {"min_aligners", s.min_aligners},
               {"extrusion_start", s.extrusion_start}}},
             {"scoring", {{"over_engineering", cfg_.scoring.over_engineering}}},
             {"counters",
              {{"pipeline_runs", counters_.pipeline_runs.load()},
               {"agent1_invocations", counters_.agent1_invocations.load()},
               {"agent2_invocations", counters_.agent2_invocations.load()}}},
             {"presets", presets}}};
}

void serve_http(ServiceApi& api, const ServiceConfig& cfg) {
    httplib::Server server;
    const std::string origin = cfg.cors_origin;
    auto add_cors = [origin](httplib::Response& res) {
        if (origin.empty()) return;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    };
    auto handler = [&api, add_cors](const httplib::Request& req, httplib::Response& res) {
        ApiRequest request{req.method, req.path, {}, req.body};
        for (const auto& [key, value] : req.params) request.query.emplace(key, value);
        const ApiResponse response = api.handle(request);
        res.status = response.status;
        res.set_content(response.body.dump(), "application/json");
        add_cors(res);
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Options(".*", [add_cors](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
        add_cors(res);
    });
    std::fprintf(stderr, "orthoplan service listening on %s:%d\n", cfg.host.c_str(), cfg.port);
    if (!server.listen(cfg.host, cfg.port)) {
        throw std::runtime_error("cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
    }
}

}  // namespace orthoplan
