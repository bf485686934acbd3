#include "orthoplan/benchmark.hpp"
#include "orthoplan/serialization.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>

using namespace orthoplan;

namespace {

std::string schema_path(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const SchemaError& e) {
        return e.path();
    }
    return "<no error>";
}

}  // namespace

TEST_CASE("plan round trip") {
    MovementPlan plan;
    plan.add(FdiTooth(13), {-4.2, 5.6, 0.0, 0.0, 0.0, 8.0});
    plan.add(FdiTooth(21), {0.1, 0.2, -0.3, 1.5, -2.5, 3.25});
    const Json doc = to_json(plan);
    CHECK(doc["schema_version"] == 1);
    const MovementPlan back = plan_from_json(doc);
    CHECK(to_json(back).dump() == doc.dump());
    CHECK(back.find(FdiTooth(21))->rz == 3.25);
}

TEST_CASE("plan schema errors name the offending field") {
    CHECK(schema_path([] { plan_from_json(Json::parse(R"({"movements": []})")); }) == "plan.schema_version");
    CHECK(schema_path([] { plan_from_json(Json::parse(R"({"schema_version": 2, "movements": []})")); }) ==
          "plan.schema_version");
    CHECK(schema_path([] { plan_from_json(Json::parse(R"({"schema_version": 1})")); }) == "plan.movements");
    CHECK(schema_path([] {
              plan_from_json(Json::parse(R"({"schema_version": 1, "movements": [{"fdi": 11, "tx_mm": "a"}]})"));
          }) == "plan.movements[0].tx_mm");
    CHECK(schema_path([] {
              plan_from_json(Json::parse(R"({"schema_version": 1, "movements": [{"fdi": 19}]})"));
          }) == "plan.movements[0].fdi");
    CHECK(schema_path([] {
              plan_from_json(Json::parse(R"({"schema_version": 1, "movements": [{"fdi": 11, "tq": 1}]})"));
          }) == "plan.movements[0].tq");
    CHECK(schema_path([] {
              plan_from_json(Json::parse(R"({"schema_version": 1, "movements": [{"fdi": 11}, {"fdi": 11}]})"));
          }) == "plan.movements[1]");
    // Omitted components default to zero.
    const MovementPlan p = plan_from_json(Json::parse(R"({"schema_version": 1, "movements": [{"fdi": 11, "tz_mm": 1}]})"));
    CHECK(*p.find(FdiTooth(11)) == ToothMovement{0, 0, 1, 0, 0, 0});
}

TEST_CASE("arch, cloud and crowding round trips") {
    ScenarioSpec spec;
    spec.seed = 17;
    spec.missing_count = 1;
    const SyntheticCase sc = generate_scenario(spec);
    const Json arch = to_json(sc.ground_truth);
    CHECK(to_json(arch_from_json(arch)).dump() == arch.dump());
    const Json cloud = to_json(sc.cloud);
    CHECK(to_json(cloud_from_json(cloud)).dump() == cloud.dump());
    const Json crowding = to_json(sc.crowding);
    CHECK(crowding_from_json(crowding).contact_overlap_mm == sc.crowding.contact_overlap_mm);

    Json bad = arch;
    bad["teeth"][2]["orientation_wxyz"] = Json::array({0, 0, 0, 0});
    CHECK(schema_path([&] { arch_from_json(bad); }) == "arch.teeth[2].orientation_wxyz");
    bad = arch;
    bad["teeth"][0]["centroid"] = Json::array({1, 2});
    CHECK(schema_path([&] { arch_from_json(bad); }) == "arch.teeth[0].centroid");
}

TEST_CASE("score round trip") {
    ArchState arch = fixtures::straight_arch();
    MovementPlan plan;
    plan.add(FdiTooth(11), {0, 0, -1.2, 0, 0, 20});
    plan.add(FdiTooth(16), {1.0, 0, 0, 0, 0, 0});
    const TreatmentScore score = score_plan(plan, arch);
    const Json doc = to_json(score);
    CHECK(doc["grade"] == std::string(to_string(score.grade)));
    CHECK(doc["findings"].size() == score.findings.size());
    CHECK(score_from_json(doc) == score);
}

TEST_CASE("frame documents key poses by FDI code") {
    const ArchState arch = fixtures::straight_arch();
    MovementPlan plan;
    plan.add(FdiTooth(11), {1, 0, 0, 0, 0, 0});
    const FrameSequence seq = generate_frames(arch, plan, {});
    const Json doc = to_json(seq);
    CHECK(doc["schema_version"] == 1);
    CHECK(doc["aligners"] == 20);
    CHECK(doc["frames_per_aligner"] == 3);
    CHECK(doc["frames"].size() == 61);
    const Json& last = doc["frames"][60];
    CHECK(last["index"] == 60);
    CHECK(last["t"] == 1.0);
    REQUIRE(last["poses"].is_object());
    CHECK(last["poses"].size() == 16);
    const Json& p11 = last["poses"]["11"];
    CHECK(p11["centroid"][0].get<double>() == arch.find(FdiTooth(11))->centroid.x + 1.0);
    CHECK(p11["orientation_wxyz"].size() == 4);
    CHECK(doc["summary"]["aligner_count"] == 20);
}

TEST_CASE("limits table document") {
    const Json doc = limits_table_json();
    CHECK(doc["tooth_types"]["incisor"]["tx_md_mm"] == 4.0);
    CHECK(doc["tooth_types"]["molar"]["rz_rotation_deg"] == 20.0);
    CHECK(doc["tooth_types"]["canine"]["eta_extrusion"] == 0.42);
    CHECK(doc["over_engineering"] == 1.3);
}

TEST_CASE("json files") {
    const auto dir = fixtures::temp_dir("json");
    const std::string path = (dir / "plan.json").string();
    MovementPlan plan;
    plan.add(FdiTooth(11), {1, 0, 0, 0, 0, 0});
    write_json_file(path, to_json(plan));
    CHECK(read_json_file(path) == to_json(plan));
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK_THROWS_AS(read_json_file(path), SchemaError);
    CHECK_THROWS_AS(read_json_file((dir / "absent.json").string()), std::runtime_error);
    std::filesystem::remove_all(dir);
}
