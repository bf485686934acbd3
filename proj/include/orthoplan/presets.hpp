#pragma once

// Bundled demonstration cases. Each preset carries its own arch geometry, so it
// can be scored and simulated without running either estimator.

#include "orthoplan/benchmark.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace orthoplan {

struct PresetCase {
    std::string key;
    std::string label;
    SyntheticCase data;
};

/// class1_crowding, open_bite, diastema, class2_div1
const std::vector<std::string>& preset_keys();
bool is_preset(std::string_view key);
/// Throws std::out_of_range for an unknown key.
PresetCase load_preset(std::string_view key);

}  // namespace orthoplan
