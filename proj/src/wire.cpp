#include "evovox/wire.hpp"

#include <chrono>
#include <stdexcept>

namespace evovox {

namespace {

void require_only_keys(const nlohmann::json& j, std::initializer_list<const char*> keys,
                       const char* where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    bool known = false;
    for (const char* k : keys)
      if (key == k) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(std::string(where) + ": unknown field '" + key + "'");
  }
}

}  // namespace

nlohmann::json request_to_json(const EvaluationRequest& request) {
  return {{"request_id", request.request_id},
          {"morphology", morphology_to_json(request.morphology)},
          {"scenario", scenario_to_json(request.scenario)},
          {"sim_config", sim_config_to_json(request.sim_config)},
          {"fitness_config", fitness_config_to_json(request.fitness_config)}};
}

EvaluationRequest request_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("request must be a JSON object");
  require_only_keys(j, {"request_id", "morphology", "scenario", "sim_config", "fitness_config"},
                    "request");
  EvaluationRequest request;
  request.request_id = j.at("request_id").get<std::string>();
  if (request.request_id.empty())
    throw std::invalid_argument("request: request_id must be nonempty");
  request.morphology = morphology_from_json(j.at("morphology"));
  const auto& scenario = j.at("scenario");
  require_only_keys(scenario, {"master_seed", "scenario_id"}, "request.scenario");
  request.scenario = scenario_from_json(scenario);
  request.sim_config = sim_config_from_json(j.at("sim_config"));
  request.fitness_config = fitness_config_from_json(j.at("fitness_config"));
  return request;
}

nlohmann::json response_to_json(const EvaluationResponse& response) {
  return {{"request_id", response.request_id},
          {"status", response.status},
          {"displacement", response.displacement},
          {"voxel_count", response.voxel_count},
          {"fitness", response.fitness},
          {"delta_score", response.delta_score},
          {"nu_score", response.nu_score},
          {"server_id", response.server_id},
          {"compute_ms", response.compute_ms}};
}

EvaluationResponse response_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("response must be a JSON object");
  require_only_keys(j,
                    {"request_id", "status", "displacement", "voxel_count", "fitness",
                     "delta_score", "nu_score", "server_id", "compute_ms"},
                    "response");
  EvaluationResponse r;
  r.request_id = j.at("request_id").get<std::string>();
  r.status = j.at("status").get<std::string>();
  r.displacement = j.at("displacement").get<double>();
  r.voxel_count = j.at("voxel_count").get<int>();
  r.fitness = j.at("fitness").get<double>();
  r.delta_score = j.at("delta_score").get<double>();
  r.nu_score = j.at("nu_score").get<double>();
  r.server_id = j.at("server_id").get<std::string>();
  r.compute_ms = j.at("compute_ms").get<std::int64_t>();
  return r;
}

EvaluationResponse evaluate_request(const EvaluationRequest& request,
                                    const std::string& server_id) {
  const auto start = std::chrono::steady_clock::now();
  const SimulationResult result =
      simulate(request.morphology, request.scenario, request.sim_config);
  const FitnessValue fitness = combined_fitness(result, request.fitness_config);

  EvaluationResponse response;
  response.request_id = request.request_id;
  response.status = sim_status_name(result.status);
  response.displacement = result.displacement;
  response.voxel_count = result.voxel_count;
  response.fitness = fitness.value;
  response.delta_score = fitness.delta_score;
  response.nu_score = fitness.nu_score;
  response.server_id = server_id;
  response.compute_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
  return response;
}

bool semantically_equal(const EvaluationResponse& a, const EvaluationResponse& b) {
  return a.request_id == b.request_id && a.status == b.status &&
         a.displacement == b.displacement && a.voxel_count == b.voxel_count &&
         a.fitness == b.fitness && a.delta_score == b.delta_score &&
         a.nu_score == b.nu_score;
}

}  // namespace evovox
