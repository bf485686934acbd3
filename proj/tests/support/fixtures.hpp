#pragma once

#include "orthoplan/dental.hpp"
#include "oracles.hpp"

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

// Every tooth of `arch` present, spaced 8 mm apart along x with identity orientation.
inline orthoplan::ArchState straight_arch(orthoplan::Arch arch = orthoplan::Arch::Upper) {
    orthoplan::ArchState state(arch);
    for (int slot = 0; slot < orthoplan::kSlotsPerArch; ++slot) {
        orthoplan::ToothState t{.fdi = orthoplan::FdiTooth::from_slot(arch, slot),
                                .centroid = {8.0 * (slot - 7.5), 0.0, 0.0},
                                .orientation = {},
                                .landmarks = {}};
        t.present = true;
        t.confidence = 0.9;
        state.put(t);
    }
    return state;
}

// Up to `max_teeth` distinct upper teeth with movements that cross every limit and
// threshold at least occasionally. Some components are exactly zero.
inline std::vector<oracle::PlanTooth> random_plan(std::mt19937_64& rng, int max_teeth = 4) {
    std::uniform_int_distribution<int> count(1, max_teeth);
    std::uniform_int_distribution<int> slot(0, 15);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::bernoulli_distribution zero(0.2);
    const double scale[6] = {4.0, 3.0, 2.5, 18.0, 12.0, 45.0};

    std::vector<oracle::PlanTooth> out;
    const int n = count(rng);
    while (static_cast<int>(out.size()) < n) {
        const int fdi = orthoplan::FdiTooth::from_slot(orthoplan::Arch::Upper, slot(rng)).code();
        bool dup = false;
        for (const auto& p : out) dup = dup || p.fdi == fdi;
        if (dup) continue;
        oracle::PlanTooth p{fdi, {}};
        for (int i = 0; i < 6; ++i) p.c[i] = zero(rng) ? 0.0 : scale[i] * unit(rng);
        out.push_back(p);
    }
    return out;
}

inline orthoplan::MovementPlan to_plan(const std::vector<oracle::PlanTooth>& teeth) {
    orthoplan::MovementPlan plan;
    for (const auto& p : teeth) {
        plan.add(orthoplan::FdiTooth(p.fdi), {p.c[0], p.c[1], p.c[2], p.c[3], p.c[4], p.c[5]});
    }
    return plan;
}

inline std::vector<int> present_codes(const orthoplan::ArchState& arch) {
    std::vector<int> out;
    for (const auto& [fdi, s] : arch.teeth()) {
        if (s.present) out.push_back(fdi.code());
    }
    return out;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() /
                     ("orthoplan-test-" + name + "-" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace fixtures
