#include "orthoplan/orchestrator.hpp"
#include "orthoplan/serialization.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <atomic>
#include <random>

using namespace orthoplan;

namespace {

// Returns a fixed output and counts invocations; optionally throws instead.
class FakeAgent final : public ToothStateEstimator {
public:
    FakeAgent(std::string name, AgentOutput out, bool fail = false)
        : name_(std::move(name)), out_(std::move(out)), fail_(fail) {}
    std::string_view name() const override { return name_; }
    AgentOutput infer(const PointCloud&) const override {
        ++calls;
        if (fail_) throw AgentUnavailable(name_ + " down");
        return out_;
    }
    mutable std::atomic<int> calls{0};

private:
    std::string name_;
    AgentOutput out_;
    bool fail_;
};

AgentOutput random_output(std::mt19937_64& rng, double conf_lo, double conf_hi, bool with_landmarks) {
    std::uniform_real_distribution<double> pos(-30.0, 30.0);
    std::uniform_real_distribution<double> conf(conf_lo, conf_hi);
    std::normal_distribution<double> n;
    std::bernoulli_distribution absent(0.1);
    AgentOutput out{ArchState(Arch::Upper), {}, {}};
    for (FdiTooth fdi : FdiTooth::all(Arch::Upper)) {
        ToothState s{.fdi = fdi, .centroid = {pos(rng), pos(rng), pos(rng)},
                     .orientation = UnitQuaternion::from_wxyz(n(rng), n(rng), n(rng), n(rng)), .landmarks = {}};
        s.confidence = conf(rng);
        s.present = !absent(rng);
        s.extents = {pos(rng) + 40, 3, 2};
        if (with_landmarks && s.present) s.landmarks = {{LandmarkGroup::Occlusal, s.centroid}};
        out.per_tooth_confidence[fdi] = s.confidence;
        out.arch.put(s);
    }
    return out;
}

std::string dump(const ArchState& arch) { return to_json(arch).dump(); }

const PointCloud kCloud{Arch::Upper, {{0, 0, 0}}, std::nullopt};

}  // namespace

TEST_CASE("fusion config validation and mode names") {
    CHECK_NOTHROW(FusionConfig{}.validate());
    FusionConfig bad;
    bad.w1 = 0.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.w1 = -0.4;
    bad.w2 = 1.4;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    for (const char* name : {"parallel", "sequential", "agent1", "agent2"}) {
        CHECK(mode_name(parse_mode(name)) == name);
    }
    CHECK_THROWS_AS(parse_mode("ensemble"), std::invalid_argument);
    CHECK(FusionConfig{}.w1 == 0.4);
    CHECK(FusionConfig{}.w2 == 0.6);
}

TEST_CASE("degenerate weights reproduce a single agent exactly") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const AgentOutput a1 = random_output(rng, 0.0, 1.0, false);
        const AgentOutput a2 = random_output(rng, 0.0, 1.0, true);
        FusionConfig only1;
        only1.w1 = 1.0;
        only1.w2 = 0.0;
        CHECK(dump(fuse_parallel(a1, a2, only1).arch) == dump(a1.arch));
        FusionConfig only2;
        only2.w1 = 0.0;
        only2.w2 = 1.0;
        CHECK(dump(fuse_parallel(a1, a2, only2).arch) == dump(a2.arch));
    }
}

TEST_CASE("default weights give convex centroid combinations") {
    std::mt19937_64 rng(32);
    const FusionConfig cfg;
    for (int trial = 0; trial < 50; ++trial) {
        const AgentOutput a1 = random_output(rng, 0.0, 1.0, false);
        const AgentOutput a2 = random_output(rng, 0.0, 1.0, true);
        const FusionResult fused = fuse_parallel(a1, a2, cfg);
        for (const auto& [fdi, s] : fused.arch.teeth()) {
            const ToothState& s1 = *a1.arch.find(fdi);
            const ToothState& s2 = *a2.arch.find(fdi);
            if (s1.present && s2.present) {
                const Vec3 expected = 0.4 * s1.centroid + 0.6 * s2.centroid;
                CHECK(distance(s.centroid, expected) < 1e-12);
                // On the segment between the two estimates.
                CHECK(std::abs(distance(s1.centroid, s.centroid) + distance(s.centroid, s2.centroid) -
                               distance(s1.centroid, s2.centroid)) < 1e-9);
                CHECK(std::abs(angular_distance(s1.orientation, s.orientation) -
                               0.6 * angular_distance(s1.orientation, s2.orientation)) < 1e-6);
                CHECK(fused.weights.at(fdi).w1 == 0.4);
            } else if (s1.present != s2.present) {
                CHECK(s.present);
                CHECK(s.centroid == (s1.present ? s1.centroid : s2.centroid));
            } else {
                CHECK_FALSE(s.present);
            }
        }
    }
}

TEST_CASE("sequential mode skips agent 1 when every confidence clears the threshold") {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 20; ++trial) {
        auto a1 = std::make_shared<FakeAgent>("segmentation", random_output(rng, 0.0, 1.0, false));
        auto a2 = std::make_shared<FakeAgent>("landmark", random_output(rng, 0.5, 1.0, true));
        const Orchestrator orch(a1, a2);
        const PipelineResult r = orch.run(FusionConfig::sequential(), kCloud);
        CHECK_FALSE(r.provenance.agent1_invoked);
        CHECK(r.provenance.agent2_invoked);
        CHECK(a1->calls == 0);
        CHECK(dump(r.arch) == dump(a2->infer(kCloud).arch));
    }
}

TEST_CASE("sequential mode refines low-confidence teeth with boosted weights") {
    std::mt19937_64 rng(34);
    AgentOutput low = random_output(rng, 0.6, 1.0, true);
    ToothState weak = *low.arch.find(FdiTooth(13));
    weak.present = true;
    weak.confidence = 0.2;
    low.arch.put(weak);
    AgentOutput seg = random_output(rng, 0.5, 1.0, false);
    ToothState s13 = *seg.arch.find(FdiTooth(13));
    s13.present = true;
    seg.arch.put(s13);

    auto a1 = std::make_shared<FakeAgent>("segmentation", seg);
    auto a2 = std::make_shared<FakeAgent>("landmark", low);
    const PipelineResult r = Orchestrator(a1, a2).run(FusionConfig::sequential(), kCloud);
    CHECK(r.provenance.agent1_invoked);
    CHECK(a1->calls == 1);
    const auto& w = r.provenance.weights.at(FdiTooth(13));
    CHECK(w.w1 == 0.8);
    CHECK(std::abs(w.w2 - 0.2) < 1e-15);
    const Vec3 expected = 0.8 * s13.centroid + (1.0 - 0.8) * weak.centroid;
    CHECK(distance(r.arch.find(FdiTooth(13))->centroid, expected) < 1e-12);
    CHECK(r.provenance.weights.at(FdiTooth(11)).w1 == 0.0);
}

TEST_CASE("sequential refinement failure keeps teeth flagged as degraded") {
    std::mt19937_64 rng(35);
    AgentOutput low = random_output(rng, 0.0, 0.4, true);
    auto a1 = std::make_shared<FakeAgent>("segmentation", low, true);
    auto a2 = std::make_shared<FakeAgent>("landmark", low);
    const PipelineResult r = Orchestrator(a1, a2).run(FusionConfig::sequential(), kCloud);
    CHECK(r.provenance.agent1_invoked);
    CHECK(r.provenance.degraded.size() == 16);
    CHECK_FALSE(r.provenance.notes.empty());
}

TEST_CASE("fallbacks when an agent is unavailable") {
    std::mt19937_64 rng(36);
    const AgentOutput out = random_output(rng, 0.0, 1.0, true);
    auto ok = std::make_shared<FakeAgent>("landmark", out);
    auto down = std::make_shared<FakeAgent>("segmentation", out, true);

    const PipelineResult par = Orchestrator(down, ok).run(FusionConfig::parallel(), kCloud);
    CHECK(dump(par.arch) == dump(out.arch));
    CHECK(par.provenance.agents_run == std::vector<std::string>{"landmark"});
    CHECK_FALSE(par.provenance.notes.empty());

    const PipelineResult single = Orchestrator(down, ok).run(FusionConfig::single(AgentId::Segmentation), kCloud);
    CHECK(single.provenance.agents_run == std::vector<std::string>{"landmark"});

    auto down2 = std::make_shared<FakeAgent>("landmark", out, true);
    CHECK_THROWS_AS(Orchestrator(down, down2).run(FusionConfig::parallel(), kCloud), PipelineError);
    CHECK_THROWS_AS(Orchestrator(down, down2).run(FusionConfig::sequential(), kCloud), PipelineError);
    CHECK_THROWS_AS(Orchestrator(nullptr, ok), std::invalid_argument);
}

TEST_CASE("single-agent modes run exactly one estimator") {
    std::mt19937_64 rng(37);
    auto a1 = std::make_shared<FakeAgent>("segmentation", random_output(rng, 0.0, 1.0, false));
    auto a2 = std::make_shared<FakeAgent>("landmark", random_output(rng, 0.0, 1.0, true));
    const Orchestrator orch(a1, a2);
    const PipelineResult r1 = orch.run(FusionConfig::single(AgentId::Segmentation), kCloud);
    CHECK(r1.provenance.agent1_invoked);
    CHECK_FALSE(r1.provenance.agent2_invoked);
    CHECK(r1.provenance.mode == "agent1");
    const PipelineResult r2 = orch.run(FusionConfig::single(AgentId::Landmark), kCloud);
    CHECK(r2.provenance.agent2_invoked);
    CHECK_FALSE(r2.provenance.agent1_invoked);
    CHECK(a1->calls == 1);
    CHECK(a2->calls == 1);
}
