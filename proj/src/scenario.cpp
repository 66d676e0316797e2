#include "evovox/scenario.hpp"

#include <stdexcept>

#include "evovox/rng.hpp"

namespace evovox {

double phase_offset(const ControllerScenario& scenario, int x, int y, int z,
                    const LatticeDims& dims) {
  if (x < 0 || x >= dims.nx || y < 0 || y >= dims.ny || z < 0 || z >= dims.nz)
    throw std::invalid_argument("phase_offset: coordinate outside the lattice");
  std::uint64_t h = mix64(scenario.master_seed ^ 0xA0761D6478BD642FULL);
  h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(scenario.scenario_id)));
  h = mix64(h ^ static_cast<std::uint64_t>(x));
  h = mix64(h ^ static_cast<std::uint64_t>(y));
  h = mix64(h ^ static_cast<std::uint64_t>(z));
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return static_cast<double>(h >> 11) * 0x1.0p-53 * kTwoPi;
}

nlohmann::json scenario_to_json(const ControllerScenario& scenario) {
  return {{"master_seed", scenario.master_seed}, {"scenario_id", scenario.scenario_id}};
}

ControllerScenario scenario_from_json(const nlohmann::json& j) {
  ControllerScenario s;
  s.master_seed = j.at("master_seed").get<std::uint64_t>();
  s.scenario_id = j.at("scenario_id").get<int>();
  if (s.scenario_id < 0)
    throw std::invalid_argument("scenario_id must be non-negative");
  return s;
}

}  // namespace evovox
