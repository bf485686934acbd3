#pragma once

#include "orthoplan/agents.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace orthoplan {

enum class FusionMode { Parallel, Sequential, SingleAgent };
enum class AgentId { Segmentation, Landmark };

/// Weights w1 (segmentation agent) and w2 (landmark agent) must sum to 1.
struct FusionConfig {
    FusionMode mode = FusionMode::Parallel;
    AgentId single_agent = AgentId::Segmentation;
    double w1 = 0.4;
    double w2 = 0.6;
    double sequential_threshold = 0.5;
    double boosted_w1 = 0.8;

    /// Throws std::invalid_argument when weights are outside [0, 1] or do not sum to 1.
    void validate() const;

    static FusionConfig parallel() { return {}; }
    static FusionConfig sequential() { return {.mode = FusionMode::Sequential}; }
    static FusionConfig single(AgentId which) {
        return {.mode = FusionMode::SingleAgent, .single_agent = which};
    }
};

/// "parallel", "sequential", "agent1", "agent2" -- the names used by the CLI and config.
std::string mode_name(const FusionConfig& cfg);
/// Applies the named mode on top of `base` (weights are kept).
FusionConfig parse_mode(std::string_view name, FusionConfig base = {});

struct ToothWeights {
    double w1 = 0.0;
    double w2 = 0.0;
};

struct FusionResult {
    ArchState arch;
    std::map<FdiTooth, ToothWeights> weights;
};

/// Teeth present in both outputs: centroid and confidence are w1/w2 averages and the
/// orientation is slerp(q1, q2, w2); landmarks come from a2. Teeth present in only
/// one output pass through with confidence scaled by that agent's weight. An agent
/// with weight 0 is ignored, so (1, 0) and (0, 1) reproduce a single agent exactly.
FusionResult fuse_parallel(const AgentOutput& a1, const AgentOutput& a2, const FusionConfig& cfg);

struct SequentialResult {
    ArchState arch;
    std::map<FdiTooth, ToothWeights> weights;
    bool agent1_invoked = false;
    bool agent1_failed = false;
    std::chrono::nanoseconds agent1_elapsed{0};
    std::string agent1_error;
};

/// Teeth with landmark-agent confidence at or above the threshold pass through. If
/// any fall below it, `agent1` runs once and those teeth are fused with
/// (boosted_w1, 1 - boosted_w1). If agent1 throws, they stay as-is, flagged degraded.
SequentialResult fuse_sequential(const AgentOutput& a2, const std::function<AgentOutput()>& agent1,
                                 const FusionConfig& cfg);

struct Provenance {
    std::string mode;
    std::vector<std::string> agents_run;
    bool agent1_invoked = false;
    bool agent2_invoked = false;
    std::map<FdiTooth, ToothWeights> weights;
    std::chrono::nanoseconds agent1_elapsed{0};
    std::chrono::nanoseconds agent2_elapsed{0};
    std::chrono::nanoseconds total_elapsed{0};
    std::vector<FdiTooth> degraded;
    std::vector<std::string> notes;
};

struct PipelineResult {
    ArchState arch;
    Provenance provenance;
};

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Runs the two estimators in the configured mode. Holds no per-run state, so a
/// single instance may serve concurrent requests.
class Orchestrator {
public:
    Orchestrator(std::shared_ptr<const ToothStateEstimator> agent1,
                 std::shared_ptr<const ToothStateEstimator> agent2);

    /// Throws PipelineError when no estimator produced output.
    PipelineResult run(const FusionConfig& cfg, const PointCloud& cloud) const;

private:
    PipelineResult run_parallel(const FusionConfig& cfg, const PointCloud& cloud) const;
    PipelineResult run_sequential(const FusionConfig& cfg, const PointCloud& cloud) const;
    PipelineResult run_single(const FusionConfig& cfg, const PointCloud& cloud) const;

    std::shared_ptr<const ToothStateEstimator> agent1_;
    std::shared_ptr<const ToothStateEstimator> agent2_;
};

}  // namespace orthoplan
