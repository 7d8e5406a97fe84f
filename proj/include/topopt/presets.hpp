#pragma once

#include "topopt/config.hpp"
#include "topopt/optimizer.hpp"

namespace topopt {

// One fully configured job: analysis problem, initial design, loop settings,
// and the complete key set it was built from.
struct PresetProblem {
    Problem problem;
    LevelSetField initial;
    OptimizerSettings settings;
    bool mirror_x = false;    // half model: mirror the final contour plot
    int snapshot_every = 10;
    Config resolved;
};

const std::vector<std::string>& preset_names();
const std::vector<std::string>& known_keys();

// Complete default configuration of a named preset.
Config preset_config(const std::string& name);

// Validates every key and builds the job. Unknown keys, malformed values,
// and geometrically impossible requests are rejected with messages that list
// the accepted alternatives.
PresetProblem build_problem(const Config& cfg);

} // namespace topopt
