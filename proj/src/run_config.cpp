#include "evovox/run_config.hpp"

#include <array>
#include <initializer_list>
#include <stdexcept>
#include <unordered_set>

#include "evovox/util.hpp"

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

void RunConfig::validate() const {
  if (algorithm != "neat" && algorithm != "hyperneat" && algorithm != "afpo") {
    throw std::invalid_argument("config.algorithm: expected neat, hyperneat, or afpo, got '" +
                                algorithm + "'");
  }
  params.validate();
  lattice.validate();
  sim.validate();
  fitness.validate();
  if (algorithm == "hyperneat") {
    substrate.validate();
    painting.validate();
    if (substrate.layer_sizes.front() != 3 || substrate.layer_sizes.back() != 2) {
      throw std::invalid_argument(
          "config.substrate: decoder needs 3 inputs (x, y, z) and 2 outputs (pv, m)");
    }
  }
  if (fitness.upsilon_max != lattice.volume()) {
    throw std::invalid_argument(
        "config.fitness.upsilon_max: must equal the lattice volume (" +
        std::to_string(lattice.volume()) + ")");
  }
  if (checkpoint_interval < 0) {
    throw std::invalid_argument("config.checkpoint_interval: must be >= 0");
  }
  if (training_scenarios < 1) {
    throw std::invalid_argument("config.training_scenarios: must be >= 1");
  }
  if (pool.retry_limit < 1) {
    throw std::invalid_argument("config.evaluation.retry_limit: must be >= 1");
  }
  if (pool.timeout_seconds <= 0.0) {
    throw std::invalid_argument("config.evaluation.timeout_seconds: must be positive");
  }
}

nlohmann::json run_config_to_json(const RunConfig& config) {
  nlohmann::json j;
  j["algorithm"] = config.algorithm;
  j["seed"] = config.seed;
  j["neat"] = neat_params_to_json(config.params);
  j["lattice"] = {{"nx", config.lattice.nx}, {"ny", config.lattice.ny}, {"nz", config.lattice.nz}};
  j["sim"] = sim_config_to_json(config.sim);
  j["fitness"] = fitness_config_to_json(config.fitness);
  if (config.algorithm == "hyperneat") {
    j["substrate"] = substrate_layout_to_json(config.substrate);
    j["painting"] = painting_config_to_json(config.painting);
  }
  if (config.is_local()) {
    j["evaluation"] = "local";
  } else {
    j["evaluation"] = {{"endpoints", config.pool.endpoints},
                       {"retry_limit", config.pool.retry_limit},
                       {"timeout_seconds", config.pool.timeout_seconds}};
  }
  if (!config.output_dir.empty()) j["output_dir"] = config.output_dir;
  j["checkpoint_interval"] = config.checkpoint_interval;
  j["training_scenarios"] = config.training_scenarios;
  return j;
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: must be a JSON object");
  require_only_keys(j,
                    {"algorithm", "seed", "neat", "lattice", "sim", "fitness", "substrate",
                     "painting", "evaluation", "output_dir", "checkpoint_interval",
                     "training_scenarios"},
                    "config");
  RunConfig config;
  config.algorithm = j.at("algorithm").get<std::string>();
  config.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("neat")) config.params = neat_params_from_json(j.at("neat"));
  if (j.contains("lattice")) {
    const auto& lat = j.at("lattice");
    require_only_keys(lat, {"nx", "ny", "nz"}, "config.lattice");
    config.lattice.nx = lat.at("nx").get<int>();
    config.lattice.ny = lat.at("ny").get<int>();
    config.lattice.nz = lat.at("nz").get<int>();
  }
  if (j.contains("sim")) config.sim = sim_config_from_json(j.at("sim"));
  if (j.contains("fitness")) {
    config.fitness = fitness_config_from_json(j.at("fitness"));
  } else {
    config.fitness.upsilon_max = config.lattice.volume();
  }
  if (j.contains("substrate")) {
    if (config.algorithm != "hyperneat")
      throw std::invalid_argument("config.substrate: only valid for algorithm hyperneat");
    config.substrate = substrate_layout_from_json(j.at("substrate"));
  }
  if (j.contains("painting")) {
    if (config.algorithm != "hyperneat")
      throw std::invalid_argument("config.painting: only valid for algorithm hyperneat");
    config.painting = painting_config_from_json(j.at("painting"));
  }
  if (j.contains("evaluation") && j.at("evaluation") != nlohmann::json("local")) {
    const auto& ev = j.at("evaluation");
    if (!ev.is_object())
      throw std::invalid_argument("config.evaluation: expected \"local\" or an object");
    require_only_keys(ev, {"endpoints", "retry_limit", "timeout_seconds"},
                      "config.evaluation");
    config.pool.endpoints = ev.at("endpoints").get<std::vector<std::string>>();
    if (ev.contains("retry_limit")) config.pool.retry_limit = ev.at("retry_limit").get<int>();
    if (ev.contains("timeout_seconds"))
      config.pool.timeout_seconds = ev.at("timeout_seconds").get<double>();
  }
  if (j.contains("output_dir")) config.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("checkpoint_interval"))
    config.checkpoint_interval = j.at("checkpoint_interval").get<int>();
  if (j.contains("training_scenarios"))
    config.training_scenarios = j.at("training_scenarios").get<int>();
  config.validate();
  return config;
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config ") + path + ": " + e.what());
  }
  try {
    return run_config_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config ") + path + ": " + e.what());
  }
}

Morphology decode_genome(const CppnGenome& genome, const RunConfig& config) {
  Morphology m;
  if (config.algorithm == "hyperneat") {
    const PhenotypeNetwork net = paint(genome, config.substrate, config.painting);
    m = decode(
        [&net](double x, double y, double z) { return query_substrate(net, x, y, z); },
        config.lattice);
    m.provenance = "substrate:" + std::to_string(genome.serial);
  } else {
    m = decode(
        [&genome](double x, double y, double z) {
          const std::vector<double> out = activate(genome, std::array<double, 3>{x, y, z});
          return std::pair<double, double>(out[0], out[1]);
        },
        config.lattice);
    m.provenance = "cppn:" + std::to_string(genome.serial);
  }
  return m;
}

GenomeFitnessPipeline::GenomeFitnessPipeline(RunConfig config, RequestEvaluator& backend)
    : config_(std::move(config)), backend_(&backend) {
  config_.validate();
  const std::uint64_t seed = config_.scenario_seed();
  scenarios_.reserve(static_cast<std::size_t>(config_.training_scenarios));
  for (int s = 0; s < config_.training_scenarios; ++s) {
    scenarios_.push_back(ControllerScenario{seed, s});
  }
}

std::vector<double> GenomeFitnessPipeline::operator()(
    const std::vector<CppnGenome>& population) {
  std::vector<std::string> keys(population.size());
  std::vector<std::string> pending;  // first-appearance order keeps ids stable
  std::unordered_set<std::string> pending_set;
  std::vector<Morphology> pending_morphologies;

  for (std::size_t i = 0; i < population.size(); ++i) {
    Morphology m = decode_genome(population[i], config_);
    std::string key = morphology_to_rle(m);
    if (voxel_count(m) < 2) {
      cache_.emplace(key, 0.0);
    } else if (cache_.find(key) == cache_.end() && pending_set.insert(key).second) {
      pending.push_back(key);
      pending_morphologies.push_back(std::move(m));
    }
    keys[i] = std::move(key);
  }

  if (!pending.empty()) {
    std::vector<EvaluationRequest> requests;
    requests.reserve(pending.size() * scenarios_.size());
    for (std::size_t p = 0; p < pending.size(); ++p) {
      for (const ControllerScenario& scenario : scenarios_) {
        EvaluationRequest request;
        request.request_id = "req-" + std::to_string(++request_counter_);
        request.morphology = pending_morphologies[p];
        request.scenario = scenario;
        request.sim_config = config_.sim;
        request.fitness_config = config_.fitness;
        requests.push_back(std::move(request));
      }
    }
    const std::vector<EvaluationResponse> responses = backend_->evaluate_all(requests);
    if (responses.size() != requests.size()) {
      throw std::runtime_error("pipeline: evaluator returned wrong response count");
    }
    for (std::size_t p = 0; p < pending.size(); ++p) {
      double sum = 0.0;
      for (std::size_t s = 0; s < scenarios_.size(); ++s) {
        sum += responses[p * scenarios_.size() + s].fitness;
      }
      cache_[pending[p]] = sum / static_cast<double>(scenarios_.size());
    }
  }

  std::vector<double> fitness(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) fitness[i] = cache_.at(keys[i]);
  return fitness;
}

}  // namespace evovox
