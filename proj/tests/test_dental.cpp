#include "orthoplan/dental.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

using namespace orthoplan;

TEST_CASE("FDI codes") {
    CHECK(FdiTooth::is_valid(11));
    CHECK(FdiTooth::is_valid(48));
    for (int bad : {0, 10, 19, 20, 29, 49, 51, 9, -11, 100}) {
        CHECK_FALSE(FdiTooth::is_valid(bad));
        CHECK_THROWS_AS(FdiTooth{bad}, std::invalid_argument);
    }
    CHECK(FdiTooth::all().size() == 32);
    CHECK(FdiTooth(36).contralateral() == FdiTooth(46));
    CHECK(FdiTooth(11).contralateral() == FdiTooth(21));
    CHECK(FdiTooth(27).arch() == Arch::Upper);
    CHECK(FdiTooth(31).arch() == Arch::Lower);
}

TEST_CASE("slot order runs from the right third molar to the left third molar") {
    const auto upper = FdiTooth::all(Arch::Upper);
    const std::vector<int> expected_upper{18, 17, 16, 15, 14, 13, 12, 11, 21, 22, 23, 24, 25, 26, 27, 28};
    const std::vector<int> expected_lower{48, 47, 46, 45, 44, 43, 42, 41, 31, 32, 33, 34, 35, 36, 37, 38};
    for (int s = 0; s < kSlotsPerArch; ++s) {
        CHECK(upper[static_cast<std::size_t>(s)].code() == expected_upper[static_cast<std::size_t>(s)]);
        CHECK(FdiTooth::from_slot(Arch::Lower, s).code() == expected_lower[static_cast<std::size_t>(s)]);
        CHECK(FdiTooth::from_slot(Arch::Upper, s).slot() == s);
        CHECK(FdiTooth::from_slot(Arch::Lower, s).slot() == s);
    }
    CHECK_THROWS_AS(FdiTooth::from_slot(Arch::Upper, 16), std::invalid_argument);
}

TEST_CASE("tooth types partition the dentition") {
    CHECK(tooth_type(11) == ToothType::Incisor);
    CHECK(tooth_type(13) == ToothType::Canine);
    CHECK(tooth_type(46) == ToothType::Molar);
    CHECK(tooth_type(35) == ToothType::Premolar);
    CHECK_THROWS_AS(tooth_type(19), std::invalid_argument);
    std::map<ToothType, int> counts;
    for (FdiTooth t : FdiTooth::all()) ++counts[tooth_type(t)];
    CHECK(counts[ToothType::Incisor] == 8);
    CHECK(counts[ToothType::Canine] == 4);
    CHECK(counts[ToothType::Premolar] == 8);
    CHECK(counts[ToothType::Molar] == 12);
}

TEST_CASE("movement limit table") {
    // Columns: incisor, canine, premolar, molar.
    const ToothType types[4] = {ToothType::Incisor, ToothType::Canine, ToothType::Premolar, ToothType::Molar};
    const double tx[4] = {4.0, 3.5, 3.5, 2.0};
    const double ty[4] = {2.5, 2.5, 3.0, 2.5};
    const double rx[4] = {15, 12, 10, 8};
    const double ry[4] = {10, 10, 10, 8};
    const double rz[4] = {45, 40, 35, 20};
    for (int i = 0; i < 4; ++i) {
        const MovementLimits l = limits_for(types[i]);
        CHECK(l.tx_md_mm == tx[i]);
        CHECK(l.ty_bl_mm == ty[i]);
        CHECK(l.rx_torque_deg == rx[i]);
        CHECK(l.ry_tip_deg == ry[i]);
        CHECK(l.rz_rotation_deg == rz[i]);
        CHECK(l.tz_intrusion_mm == 2.0);
        CHECK(l.tz_extrusion_mm == 1.5);
        CHECK(l.eta_intrusion == 0.69);
        CHECK(l.eta_extrusion == 0.42);
    }
    const MovementLimits inc = limits_for(ToothType::Incisor);
    CHECK(axis_limit(inc, Axis::Tz, 0.3) == 2.0);
    CHECK(axis_limit(inc, Axis::Tz, -0.3) == 1.5);
    CHECK(axis_limit(inc, Axis::Tz, 0.0) == 2.0);
}

TEST_CASE("predictability table") {
    const PredictabilityTable eta;
    CHECK(eta.eta(ToothType::Molar, Axis::Tx, 1.0) == 0.85);
    CHECK(eta.eta(ToothType::Molar, Axis::Tz, 1.0) == 0.69);
    CHECK(eta.eta(ToothType::Molar, Axis::Tz, -1.0) == 0.42);
    CHECK(eta.eta(ToothType::Incisor, Axis::Rx, 1.0) == 0.50);
    CHECK(eta.eta(ToothType::Incisor, Axis::Ry, 1.0) == 0.75);
    CHECK(eta.eta(ToothType::Incisor, Axis::Rz, 1.0) == 0.55);
    CHECK(eta.eta(ToothType::Canine, Axis::Rz, 1.0) == 0.45);
    CHECK(eta.eta(ToothType::Premolar, Axis::Rz, 1.0) == 0.45);
}

TEST_CASE("movement plans reject duplicates") {
    MovementPlan plan;
    plan.add(FdiTooth(11), {1, 0, 0, 0, 0, 0});
    CHECK_THROWS_AS(plan.add(FdiTooth(11), {}), std::invalid_argument);
    plan.set(FdiTooth(11), {2, 0, 0, 0, 0, 0});
    CHECK(plan.find(FdiTooth(11))->tx == 2.0);
    CHECK(plan.find(FdiTooth(12)) == nullptr);
    const ToothMovement m{1, 2, 3, 4, 5, 6};
    CHECK(m.scaled(2.0) == ToothMovement{2, 4, 6, 8, 10, 12});
    CHECK(m[Axis::Rz] == 6.0);
}

TEST_CASE("arch state invariants") {
    ArchState arch(Arch::Upper);
    ToothState t{.fdi = FdiTooth(11), .centroid = {}, .orientation = {}, .landmarks = {}};
    t.confidence = 1.2;
    CHECK_THROWS_AS(arch.put(t), std::invalid_argument);
    t.confidence = 0.5;
    t.landmarks = {{LandmarkGroup::Mesial, {}}};
    CHECK_THROWS_AS(arch.put(t), std::invalid_argument);  // absent with landmarks
    t.present = true;
    arch.put(t);
    CHECK(arch.is_present(FdiTooth(11)));
    ToothState lower{.fdi = FdiTooth(41), .centroid = {}, .orientation = {}, .landmarks = {}};
    CHECK_THROWS_AS(arch.put(lower), std::invalid_argument);
}

TEST_CASE("point cloud validation") {
    PointCloud cloud;
    CHECK_THROWS_AS(cloud.validate(), std::invalid_argument);
    cloud.points = {{0, 0, 0}, {1, 1, 1}};
    cloud.validate();
    cloud.labels = std::vector<FdiTooth>{FdiTooth(11)};
    CHECK_THROWS_AS(cloud.validate(), std::invalid_argument);
    cloud.labels = std::vector<FdiTooth>{FdiTooth(11), FdiTooth(31)};
    CHECK_THROWS_AS(cloud.validate(), std::invalid_argument);
    cloud.labels.reset();
    cloud.points.push_back({std::numeric_limits<double>::quiet_NaN(), 0, 0});
    CHECK_THROWS_AS(cloud.validate(), std::invalid_argument);
}

TEST_CASE("plan validation notes") {
    ArchState arch = fixtures::straight_arch();
    MovementPlan ok;
    ok.add(FdiTooth(11), {1, 0, 0, 0, 0, 0});
    CHECK(validate_plan(ok, arch).empty());

    ToothState gone = *arch.find(FdiTooth(18));
    gone.present = false;
    arch.put(gone);
    MovementPlan absent;
    absent.add(FdiTooth(18), {1, 0, 0, 0, 0, 0});
    auto notes = validate_plan(absent, arch);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].kind == PlanNote::Kind::AbsentTooth);

    MovementPlan nan_plan;
    nan_plan.add(FdiTooth(11), {0, 0, std::nan(""), 0, 0, 0});
    notes = validate_plan(nan_plan, arch);
    REQUIRE(notes.size() == 1);
    CHECK(notes[0].kind == PlanNote::Kind::NonFinite);

    MovementPlan wrong;
    wrong.add(FdiTooth(31), {});
    CHECK(validate_plan(wrong, arch).at(0).kind == PlanNote::Kind::WrongArch);
    CHECK(validate_plan(MovementPlan{}, arch).at(0).kind == PlanNote::Kind::EmptyPlan);
}
