#include "evovox/fitness.hpp"

#include <algorithm>
#include <stdexcept>

#include "evovox/util.hpp"

namespace evovox {

void FitnessConfig::validate() const {
  if (!(delta_max > 0.0)) throw std::invalid_argument("FitnessConfig: delta_max must be > 0");
  if (upsilon_max < 1)
    throw std::invalid_argument("FitnessConfig: upsilon_max must be >= 1");
}

double displacement_score(double delta, const FitnessConfig& cfg) {
  cfg.validate();
  double score = delta / cfg.delta_max;
  if (cfg.clamp_delta) score = std::clamp(score, 0.0, 1.0);
  return score;
}

double volume_score(int count, const FitnessConfig& cfg) {
  cfg.validate();
  return 1.0 - static_cast<double>(count) / static_cast<double>(cfg.upsilon_max);
}

FitnessValue combined_fitness(const SimulationResult& result, const FitnessConfig& cfg) {
  cfg.validate();
  if (result.status != SimStatus::kOk) return {};
  FitnessValue v;
  v.delta_score = displacement_score(result.displacement, cfg);
  v.nu_score = volume_score(result.voxel_count, cfg);
  v.value = cfg.mode == FitnessConfig::Mode::kDisplacementOnly
                ? result.displacement
                : 0.5 * v.delta_score + 0.5 * v.nu_score;
  return v;
}

std::vector<FitnessValue> evaluate_batch(const Morphology& m,
                                         const std::vector<ControllerScenario>& scenarios,
                                         const SimConfig& sim_cfg, const FitnessConfig& cfg,
                                         const BatchEvaluator& evaluator) {
  cfg.validate();
  if (scenarios.empty()) return {};
  const std::vector<SimulationResult> results = evaluator(m, scenarios, sim_cfg);
  if (results.size() != scenarios.size())
    throw std::runtime_error("evaluate_batch: evaluator returned wrong result count");
  std::vector<FitnessValue> values;
  values.reserve(results.size());
  for (const auto& r : results) values.push_back(combined_fitness(r, cfg));
  return values;
}

BatchEvaluator local_batch_evaluator() {
  return [](const Morphology& m, const std::vector<ControllerScenario>& scenarios,
            const SimConfig& sim_cfg) {
    std::vector<SimulationResult> results;
    results.reserve(scenarios.size());
    for (const auto& scenario : scenarios) results.push_back(simulate(m, scenario, sim_cfg));
    return results;
  };
}

std::string robustness_csv(const std::vector<ControllerScenario>& scenarios,
                           const std::vector<SimulationResult>& results,
                           const std::vector<FitnessValue>& values) {
  if (scenarios.size() != results.size() || results.size() != values.size())
    throw std::invalid_argument("robustness_csv: mismatched lengths");
  std::string out = csv_row(
      {"scenario_id", "displacement", "voxel_count", "delta_score", "nu_score", "fitness"});
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    out += csv_row({std::to_string(scenarios[i].scenario_id),
                    format_double(results[i].displacement),
                    std::to_string(results[i].voxel_count),
                    format_double(values[i].delta_score), format_double(values[i].nu_score),
                    format_double(values[i].value)});
  }
  return out;
}

nlohmann::json fitness_config_to_json(const FitnessConfig& cfg) {
  return {{"delta_max", cfg.delta_max},
          {"upsilon_max", cfg.upsilon_max},
          {"mode", cfg.mode == FitnessConfig::Mode::kDisplacementOnly ? "displacement_only"
                                                                      : "combined"},
          {"clamp_delta", cfg.clamp_delta}};
}

FitnessConfig fitness_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("fitness config must be a JSON object");
  FitnessConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "delta_max") cfg.delta_max = value.get<double>();
    else if (key == "upsilon_max") cfg.upsilon_max = value.get<int>();
    else if (key == "clamp_delta") cfg.clamp_delta = value.get<bool>();
    else if (key == "mode") {
      const std::string mode = value.get<std::string>();
      if (mode == "displacement_only") cfg.mode = FitnessConfig::Mode::kDisplacementOnly;
      else if (mode == "combined") cfg.mode = FitnessConfig::Mode::kCombined;
      else throw std::invalid_argument("fitness config: unknown mode '" + mode + "'");
    } else {
      throw std::invalid_argument("fitness config: unknown field '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace evovox
