#include "orthoplan/presets.hpp"

#include <algorithm>
#include <stdexcept>

namespace orthoplan {

namespace {

struct PresetDef {
    const char* key;
    const char* label;
    std::uint64_t seed;
    std::vector<std::pair<int, ToothMovement>> movements;
};

const std::vector<PresetDef>& definitions() {
    static const std::vector<PresetDef> defs = {
        {"class1_crowding",
         "Class I crowding, blocked-out upper right canine",
         101,
         {{13, {-4.2, 5.6, 0.0, 0.0, 0.0, 8.0}},
          {12, {0.0, -0.8, 0.0, 0.0, 0.0, 12.0}},
          {11, {0.5, 0.0, 0.0, 0.0, 0.0, -8.0}},
          {21, {-0.3, 0.0, 0.0, 0.0, 0.0, 6.0}},
          {22, {0.0, 0.6, 0.0, 0.0, 0.0, -10.0}},
          {23, {1.2, 0.0, 0.0, 0.0, 0.0, 9.0}}}},
        {"open_bite",
         "Anterior open bite",
         202,
         {{13, {0.0, 0.0, -0.5, 0.0, 0.0, 0.0}},
          {12, {0.0, 0.0, -1.0, 0.0, 0.0, 0.0}},
          {11, {0.0, 0.0, -1.4, 2.0, 0.0, 0.0}},
          {21, {0.0, 0.0, -1.3, 2.0, 0.0, 0.0}},
          {22, {0.0, 0.0, -1.1, 0.0, 0.0, 0.0}},
          {23, {0.0, 0.0, -0.5, 0.0, 0.0, 0.0}}}},
        {"diastema",
         "Maxillary midline diastema",
         303,
         {{11, {1.25, 0.0, 0.0, 0.0, 0.0, 0.0}},
          {21, {-1.25, 0.0, 0.0, 0.0, 0.0, 0.0}},
          {12, {0.6, 0.0, 0.0, 0.0, 0.0, 0.0}},
          {22, {-0.6, 0.0, 0.0, 0.0, 0.0, 0.0}}}},
        {"class2_div1",
         "Class II division 1, incisor retraction with molar distalization",
         404,
         {{12, {0.0, -2.0, 0.0, -10.0, 0.0, 0.0}},
          {11, {0.0, -2.0, 0.0, -10.0, 0.0, 0.0}},
          {21, {0.0, -2.0, 0.0, -10.0, 0.0, 0.0}},
          {22, {0.0, -2.0, 0.0, -10.0, 0.0, 0.0}},
          {16, {0.0, -2.0, 0.0, 0.0, 0.0, 0.0}},
          {17, {0.0, -2.0, 0.0, 0.0, 0.0, 0.0}},
          {26, {0.0, -2.0, 0.0, 0.0, 0.0, 0.0}},
          {27, {0.0, -2.0, 0.0, 0.0, 0.0, 0.0}}}},
    };
    return defs;
}

}  // namespace

const std::vector<std::string>& preset_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const PresetDef& d : definitions()) k.emplace_back(d.key);
        return k;
    }();
    return keys;
}

bool is_preset(std::string_view key) {
    const auto& keys = preset_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

PresetCase load_preset(std::string_view key) {
    const auto& defs = definitions();
    const auto it = std::find_if(defs.begin(), defs.end(), [&](const PresetDef& d) { return d.key == key; });
    if (it == defs.end()) throw std::out_of_range("unknown preset '" + std::string(key) + "'");

    ScenarioSpec spec;
    spec.archetype = Archetype::Ovoid;
    spec.severity = CrowdingSeverity::Mild;
    spec.missing_count = 0;
    spec.seed = it->seed;
    spec.arch = Arch::Upper;
    SyntheticConfig synthetic;
    synthetic.open_bite_fraction = 0.0;

    PresetCase preset{it->key, it->label, generate_scenario(spec, synthetic)};
    MovementPlan plan;
    for (const auto& [code, m] : it->movements) plan.add(FdiTooth(code), m);
    preset.data.target_plan = std::move(plan);
    return preset;
}

}  // namespace orthoplan
