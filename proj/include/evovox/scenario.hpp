#pragma once

#include <cstdint>

#include <json.hpp>

#include "evovox/morphology.hpp"

namespace evovox {

// One controller assignment: every lattice coordinate gets a fixed actuation
// phase derived purely from (master_seed, scenario_id, x, y, z), so the same
// scenario drives every morphology identically at shared coordinates.
struct ControllerScenario {
  std::uint64_t master_seed = 0;
  int scenario_id = 0;
};

// Phase in [0, 2*pi). Throws if the coordinate is outside the lattice.
double phase_offset(const ControllerScenario& scenario, int x, int y, int z,
                    const LatticeDims& dims);

nlohmann::json scenario_to_json(const ControllerScenario& scenario);
ControllerScenario scenario_from_json(const nlohmann::json& j);

}  // namespace evovox
