#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "evovox/fitness.hpp"
#include "evovox/morphology.hpp"
#include "evovox/scenario.hpp"
#include "evovox/simulator.hpp"

namespace evovox {

// Self-contained evaluation job: the server needs nothing beyond this body.
struct EvaluationRequest {
  std::string request_id;
  Morphology morphology;
  ControllerScenario scenario;
  SimConfig sim_config;
  FitnessConfig fitness_config;
};

struct EvaluationResponse {
  std::string request_id;
  std::string status;  // ok | unstable | invalid_morphology | error
  double displacement = 0.0;
  int voxel_count = 0;
  double fitness = 0.0;
  double delta_score = 0.0;
  double nu_score = 0.0;
  std::string server_id;
  std::int64_t compute_ms = 0;
};

nlohmann::json request_to_json(const EvaluationRequest& request);
// Strict at every level: unknown fields and invariant violations throw
// std::invalid_argument (mapped to HTTP 422 by the server).
EvaluationRequest request_from_json(const nlohmann::json& j);

nlohmann::json response_to_json(const EvaluationResponse& response);
EvaluationResponse response_from_json(const nlohmann::json& j);

// The one evaluation core used by both the in-process path and the HTTP
// server, so the two are value-identical by construction.
EvaluationResponse evaluate_request(const EvaluationRequest& request,
                                    const std::string& server_id);

// Field-wise equality ignoring server_id and compute_ms.
bool semantically_equal(const EvaluationResponse& a, const EvaluationResponse& b);

}  // namespace evovox
