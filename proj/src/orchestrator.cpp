#include "orthoplan/orchestrator.hpp"

#include <algorithm>
#include <future>
#include <optional>

namespace orthoplan {

namespace {

using Clock = std::chrono::steady_clock;

std::chrono::nanoseconds since(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
}

// Shared per-tooth rule for both fusion modes. Either side may be missing.
ToothState fuse_tooth(const ToothState* s1, const ToothState* s2, double w1, double w2) {
    const bool p1 = s1 != nullptr && s1->present;
    const bool p2 = s2 != nullptr && s2->present;
    if (p1 && p2) {
        ToothState out = *s2;
        out.centroid = w1 * s1->centroid + w2 * s2->centroid;
        out.orientation = slerp(s1->orientation, s2->orientation, w2);
        out.confidence = std::clamp(w1 * s1->confidence + w2 * s2->confidence, 0.0, 1.0);
        for (std::size_t i = 0; i < 3; ++i) out.extents[i] = w1 * s1->extents[i] + w2 * s2->extents[i];
        out.degraded = s1->degraded || s2->degraded;
        return out;
    }
    if (p1 || p2) {
        ToothState out = p1 ? *s1 : *s2;
        out.confidence = std::clamp(out.confidence * (p1 ? w1 : w2), 0.0, 1.0);
        return out;
    }
    ToothState out = s2 != nullptr ? *s2 : *s1;
    const double c1 = s1 != nullptr ? s1->confidence : 0.0;
    const double c2 = s2 != nullptr ? s2->confidence : 0.0;
    out.confidence = std::clamp(w1 * c1 + w2 * c2, 0.0, 1.0);
    out.present = false;
    out.landmarks.clear();
    return out;
}

void check_weight(double w, const char* name) {
    if (!(w >= 0.0 && w <= 1.0)) {
        throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
    }
}

}  // namespace

void FusionConfig::validate() const {
    check_weight(w1, "w1");
    check_weight(w2, "w2");
    check_weight(sequential_threshold, "sequential threshold");
    check_weight(boosted_w1, "boosted w1");
    if (std::abs(w1 + w2 - 1.0) > 1e-12) throw std::invalid_argument("w1 + w2 must equal 1");
}

std::string mode_name(const FusionConfig& cfg) {
    switch (cfg.mode) {
        case FusionMode::Parallel: return "parallel";
        case FusionMode::Sequential: return "sequential";
        case FusionMode::SingleAgent:
            return cfg.single_agent == AgentId::Segmentation ? "agent1" : "agent2";
    }
    return "unknown";
}

FusionConfig parse_mode(std::string_view name, FusionConfig base) {
    if (name == "parallel") {
        base.mode = FusionMode::Parallel;
    } else if (name == "sequential") {
        base.mode = FusionMode::Sequential;
    } else if (name == "agent1" || name == "segmentation") {
        base.mode = FusionMode::SingleAgent;
        base.single_agent = AgentId::Segmentation;
    } else if (name == "agent2" || name == "landmark") {
        base.mode = FusionMode::SingleAgent;
        base.single_agent = AgentId::Landmark;
    } else {
        throw std::invalid_argument("unknown orchestrator mode '" + std::string(name) + "'");
    }
    return base;
}

FusionResult fuse_parallel(const AgentOutput& a1, const AgentOutput& a2, const FusionConfig& cfg) {
    cfg.validate();
    if (a1.arch.arch() != a2.arch.arch()) {
        throw std::invalid_argument("cannot fuse estimates of different arches");
    }
    FusionResult result{ArchState(a1.arch.arch()), {}};
    // A zero weight removes that agent from the fusion entirely, so (1, 0) and (0, 1)
    // reproduce the other agent's output.
    const ArchState* arch1 = cfg.w1 > 0.0 ? &a1.arch : nullptr;
    const ArchState* arch2 = cfg.w2 > 0.0 ? &a2.arch : nullptr;
    std::vector<FdiTooth> teeth;
    if (arch1 != nullptr) {
        for (const auto& [fdi, s] : arch1->teeth()) teeth.push_back(fdi);
    }
    if (arch2 != nullptr) {
        for (const auto& [fdi, s] : arch2->teeth()) {
            if (arch1 == nullptr || arch1->find(fdi) == nullptr) teeth.push_back(fdi);
        }
    }
    for (const FdiTooth fdi : teeth) {
        const ToothState* s1 = arch1 != nullptr ? arch1->find(fdi) : nullptr;
        const ToothState* s2 = arch2 != nullptr ? arch2->find(fdi) : nullptr;
        const bool p1 = s1 != nullptr && s1->present;
        const bool p2 = s2 != nullptr && s2->present;
        result.arch.put(fuse_tooth(s1, s2, cfg.w1, cfg.w2));
        result.weights[fdi] = {p1 || !p2 ? cfg.w1 : 0.0, p2 || !p1 ? cfg.w2 : 0.0};
    }
    return result;
}

SequentialResult fuse_sequential(const AgentOutput& a2, const std::function<AgentOutput()>& agent1,
                                 const FusionConfig& cfg) {
    cfg.validate();
    SequentialResult result;
    result.arch = ArchState(a2.arch.arch());
    std::vector<FdiTooth> low;
    for (const auto& [fdi, state] : a2.arch.teeth()) {
        if (state.confidence < cfg.sequential_threshold) {
            low.push_back(fdi);
        } else {
            result.arch.put(state);
            result.weights[fdi] = {0.0, 1.0};
        }
    }
    if (low.empty()) return result;

    std::optional<AgentOutput> a1;
    const auto start = Clock::now();
    result.agent1_invoked = true;
    try {
        a1 = agent1();
        if (a1->arch.arch() != a2.arch.arch()) {
            throw std::invalid_argument("segmentation estimate is for the other arch");
        }
    } catch (const std::exception& e) {
        a1.reset();
        result.agent1_failed = true;
        result.agent1_error = e.what();
    }
    result.agent1_elapsed = since(start);

    const double w1 = cfg.boosted_w1;
    const double w2 = 1.0 - cfg.boosted_w1;
    for (const FdiTooth fdi : low) {
        const ToothState* s2 = a2.arch.find(fdi);
        if (!a1) {
            ToothState kept = *s2;
            kept.degraded = true;
            result.arch.put(std::move(kept));
            result.weights[fdi] = {0.0, 1.0};
            continue;
        }
        result.arch.put(fuse_tooth(a1->arch.find(fdi), s2, w1, w2));
        result.weights[fdi] = {w1, w2};
    }
    return result;
}

Orchestrator::Orchestrator(std::shared_ptr<const ToothStateEstimator> agent1,
                           std::shared_ptr<const ToothStateEstimator> agent2)
    : agent1_(std::move(agent1)), agent2_(std::move(agent2)) {
    if (!agent1_ || !agent2_) throw std::invalid_argument("orchestrator needs both estimators");
}

PipelineResult Orchestrator::run(const FusionConfig& cfg, const PointCloud& cloud) const {
    cfg.validate();
    const auto start = Clock::now();
    PipelineResult result = [&] {
        switch (cfg.mode) {
            case FusionMode::Parallel: return run_parallel(cfg, cloud);
            case FusionMode::Sequential: return run_sequential(cfg, cloud);
            case FusionMode::SingleAgent: return run_single(cfg, cloud);
        }
        throw std::invalid_argument("unknown fusion mode");
    }();
    result.provenance.mode = mode_name(cfg);
    result.provenance.total_elapsed = since(start);
    for (const auto& [fdi, state] : result.arch.teeth()) {
        if (state.degraded) result.provenance.degraded.push_back(fdi);
    }
    return result;
}

namespace {

PipelineResult single_output(const AgentOutput& out, const ToothStateEstimator& agent, bool is_agent1) {
    PipelineResult r{out.arch, {}};
    r.provenance.agents_run.emplace_back(agent.name());
    if (is_agent1) {
        r.provenance.agent1_invoked = true;
        r.provenance.agent1_elapsed = out.elapsed;
    } else {
        r.provenance.agent2_invoked = true;
        r.provenance.agent2_elapsed = out.elapsed;
    }
    for (const auto& [fdi, state] : out.arch.teeth()) {
        r.provenance.weights[fdi] = is_agent1 ? ToothWeights{1.0, 0.0} : ToothWeights{0.0, 1.0};
    }
    return r;
}

}  // namespace

PipelineResult Orchestrator::run_parallel(const FusionConfig& cfg, const PointCloud& cloud) const {
    auto f1 = std::async(std::launch::async, [&] { return agent1_->infer(cloud); });
    auto f2 = std::async(std::launch::async, [&] { return agent2_->infer(cloud); });
    std::optional<AgentOutput> a1;
    std::optional<AgentOutput> a2;
    std::string err1;
    std::string err2;
    try {
        a1 = f1.get();
    } catch (const std::exception& e) {
        err1 = e.what();
    }
    try {
        a2 = f2.get();
    } catch (const std::exception& e) {
        err2 = e.what();
    }

    if (a1 && a2) {
        FusionResult fused = fuse_parallel(*a1, *a2, cfg);
        PipelineResult r{std::move(fused.arch), {}};
        r.provenance.agents_run = {std::string(agent1_->name()), std::string(agent2_->name())};
        r.provenance.agent1_invoked = true;
        r.provenance.agent2_invoked = true;
        r.provenance.agent1_elapsed = a1->elapsed;
        r.provenance.agent2_elapsed = a2->elapsed;
        r.provenance.weights = std::move(fused.weights);
        return r;
    }
    if (!a1 && !a2) {
        throw PipelineError("both estimators failed: " + err1 + "; " + err2);
    }
    PipelineResult r = a1 ? single_output(*a1, *agent1_, true) : single_output(*a2, *agent2_, false);
    // The failed agent was still invoked.
    r.provenance.agent1_invoked = true;
    r.provenance.agent2_invoked = true;
    r.provenance.notes.push_back("parallel fallback: " + (a1 ? err2 : err1));
    return r;
}

PipelineResult Orchestrator::run_sequential(const FusionConfig& cfg, const PointCloud& cloud) const {
    std::optional<AgentOutput> a2;
    std::string err2;
    try {
        a2 = agent2_->infer(cloud);
    } catch (const std::exception& e) {
        err2 = e.what();
    }
    if (!a2) {
        try {
            PipelineResult r = single_output(agent1_->infer(cloud), *agent1_, true);
            r.provenance.agent2_invoked = true;
            r.provenance.notes.push_back("sequential fallback to segmentation agent: " + err2);
            return r;
        } catch (const std::exception& e) {
            throw PipelineError("both estimators failed: " + err2 + "; " + e.what());
        }
    }

    SequentialResult seq = fuse_sequential(*a2, [&] { return agent1_->infer(cloud); }, cfg);
    PipelineResult r{std::move(seq.arch), {}};
    r.provenance.agents_run.emplace_back(agent2_->name());
    r.provenance.agent2_invoked = true;
    r.provenance.agent2_elapsed = a2->elapsed;
    r.provenance.agent1_invoked = seq.agent1_invoked;
    r.provenance.agent1_elapsed = seq.agent1_elapsed;
    if (seq.agent1_invoked && !seq.agent1_failed) r.provenance.agents_run.emplace_back(agent1_->name());
    if (seq.agent1_failed) r.provenance.notes.push_back("segmentation refinement failed: " + seq.agent1_error);
    r.provenance.weights = std::move(seq.weights);
    return r;
}

PipelineResult Orchestrator::run_single(const FusionConfig& cfg, const PointCloud& cloud) const {
    const bool first_is_1 = cfg.single_agent == AgentId::Segmentation;
    const auto& primary = first_is_1 ? agent1_ : agent2_;
    const auto& backup = first_is_1 ? agent2_ : agent1_;
    try {
        return single_output(primary->infer(cloud), *primary, first_is_1);
    } catch (const std::exception& e) {
        const std::string err = e.what();
        try {
            PipelineResult r = single_output(backup->infer(cloud), *backup, !first_is_1);
            (first_is_1 ? r.provenance.agent1_invoked : r.provenance.agent2_invoked) = true;
            r.provenance.notes.push_back("single-agent fallback: " + err);
            return r;
        } catch (const std::exception& e2) {
            throw PipelineError("both estimators failed: " + err + "; " + e2.what());
        }
    }
}

}  // namespace orthoplan
