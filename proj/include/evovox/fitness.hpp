#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evovox/morphology.hpp"
#include "evovox/scenario.hpp"
#include "evovox/simulator.hpp"

namespace evovox {

struct FitnessConfig {
  enum class Mode { kDisplacementOnly, kCombined };

  double delta_max = 20.0;
  int upsilon_max = 448;
  Mode mode = Mode::kCombined;
  bool clamp_delta = true;

  void validate() const;
};

struct FitnessValue {
  double value = 0.0;
  double delta_score = 0.0;
  double nu_score = 0.0;
};

// delta = displacement / delta_max, clamped to [0, 1] when configured.
double displacement_score(double delta, const FitnessConfig& cfg);

// nu = 1 - count / upsilon_max.
double volume_score(int count, const FitnessConfig& cfg);

// Combined mode: value = 0.5*delta + 0.5*nu; displacement-only mode returns
// the raw displacement. Non-ok simulation status zeroes everything.
FitnessValue combined_fitness(const SimulationResult& result, const FitnessConfig& cfg);

// One simulation per scenario, results positionally aligned with the input
// list. The evaluator indirection lets batches run locally or over the wire.
using BatchEvaluator =
    std::function<std::vector<SimulationResult>(const Morphology&,
                                                const std::vector<ControllerScenario>&,
                                                const SimConfig&)>;

std::vector<FitnessValue> evaluate_batch(const Morphology& m,
                                         const std::vector<ControllerScenario>& scenarios,
                                         const SimConfig& sim_cfg, const FitnessConfig& cfg,
                                         const BatchEvaluator& evaluator);

// In-process evaluator running the simulator directly.
BatchEvaluator local_batch_evaluator();

// Robustness CSV: scenario_id, displacement, voxel_count, delta_score,
// nu_score, fitness — one row per scenario in input order.
std::string robustness_csv(const std::vector<ControllerScenario>& scenarios,
                           const std::vector<SimulationResult>& results,
                           const std::vector<FitnessValue>& values);

nlohmann::json fitness_config_to_json(const FitnessConfig& cfg);
// Strict: unknown keys rejected.
FitnessConfig fitness_config_from_json(const nlohmann::json& j);

}  // namespace evovox
