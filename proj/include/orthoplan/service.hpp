#pragma once

// REST API over the scoring, staging and estimation pipeline.
//
//   GET  /api/patients                 record summaries
//   GET  /api/patients/{id}            full record
//   POST /api/patients                 {label?, arch | cloud, plan, crowding?} -> 201 record
//   POST /api/patients/{id}/rescore    {plan, version?} -> score, summary and frames
//   GET  /api/patients/{id}/frames     stored frame sequence
//   GET  /api/demo[?case=key]          preset list, or the preset as a stored record
//   GET  /api/limits                   movement limits and predictability table
//   GET  /api/training/status          static pipeline descriptor and counters
//
// Errors are {"error": {"code", "message", ...}} with 404 (unknown id, preset or
// route), 409 (version mismatch), 422 (schema or plan violation) or 500.

#include "orthoplan/config.hpp"
#include "orthoplan/orchestrator.hpp"
#include "orthoplan/serialization.hpp"
#include "orthoplan/store.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <string>

namespace orthoplan {

inline constexpr const char* kServiceVersion = "1.0.0";

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    Json body;
};

struct PipelineCounters {
    std::atomic<long> pipeline_runs{0};
    std::atomic<long> agent1_invocations{0};
    std::atomic<long> agent2_invocations{0};
};

/// Default landmark heatmaps for uploaded clouds: the configured heatmap file, or a
/// source that reports the agent as unavailable so the orchestrator falls back.
std::shared_ptr<const HeatmapSource> service_heatmap_source(const AppConfig& cfg);

class ServiceApi {
public:
    ServiceApi(AppConfig cfg, std::shared_ptr<PatientStore> store, std::shared_ptr<const Orchestrator> orchestrator);

    /// Thread-safe; never throws.
    ApiResponse handle(const ApiRequest& request);

    const PipelineCounters& counters() const { return counters_; }

private:
    ApiResponse list_patients() const;
    ApiResponse get_patient(const std::string& id) const;
    ApiResponse get_frames(const std::string& id) const;
    ApiResponse create_patient(const Json& body);
    ApiResponse rescore(const std::string& id, const Json& body);
    ApiResponse demo(const std::map<std::string, std::string>& query);
    ApiResponse status() const;

    struct Evaluation {
        Json score;
        Json frames;
        Json summary;
    };
    Evaluation evaluate(const ArchState& arch, const MovementPlan& plan,
                        const std::optional<CrowdingMetadata>& crowding) const;

    AppConfig cfg_;
    std::shared_ptr<PatientStore> store_;
    std::shared_ptr<const Orchestrator> orchestrator_;
    PipelineCounters counters_;
};

/// Blocks serving `api` over HTTP until the process is stopped.
void serve_http(ServiceApi& api, const ServiceConfig& cfg);

}  // namespace orthoplan
