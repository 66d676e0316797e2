#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "evovox/eval_client.hpp"
#include "evovox/evolution.hpp"
#include "evovox/fitness.hpp"
#include "evovox/genome.hpp"
#include "evovox/morphology.hpp"
#include "evovox/scenario.hpp"
#include "evovox/simulator.hpp"
#include "evovox/substrate.hpp"

namespace evovox {

// One master seed fans out into independent streams so toggling one concern
// (say, the number of training scenarios) never shifts another's draws.
inline constexpr std::uint64_t kStreamEvolution = 0x45564f4cULL;  // GA + init
inline constexpr std::uint64_t kStreamScenarios = 0x5343454eULL;  // phase offsets

// Full description of an evolution run; the JSON schema is strict (unknown
// keys rejected) so config typos fail before any compute is spent.
struct RunConfig {
  std::string algorithm = "neat";  // neat | hyperneat | afpo
  std::uint64_t seed = 0;
  NeatParams params;
  LatticeDims lattice;
  SimConfig sim;
  FitnessConfig fitness;
  SubstrateLayout substrate;  // hyperneat only
  PaintingConfig painting;    // hyperneat only
  ServerPool pool;            // empty endpoint list -> evaluate in-process
  std::string output_dir;
  int checkpoint_interval = 50;
  int training_scenarios = 1;

  bool is_local() const { return pool.endpoints.empty(); }
  int cppn_inputs() const { return algorithm == "hyperneat" ? 5 : 3; }
  int cppn_outputs() const { return algorithm == "hyperneat" ? 1 : 2; }
  std::uint64_t scenario_seed() const { return derive_seed(seed, kStreamScenarios); }

  void validate() const;
};

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);

// Genome -> morphology for the configured algorithm: direct CPPN queries for
// neat/afpo, substrate painting + substrate queries for hyperneat.
Morphology decode_genome(const CppnGenome& genome, const RunConfig& config);

// Population-level fitness: decodes each genome, batches one request per
// (unseen morphology, training scenario) through the evaluator, and averages
// the per-scenario fitness. Results are cached by morphology RLE, and
// sub-2-voxel morphologies score 0 without a simulation.
class GenomeFitnessPipeline {
 public:
  GenomeFitnessPipeline(RunConfig config, RequestEvaluator& backend);

  std::vector<double> operator()(const std::vector<CppnGenome>& population);

  const std::vector<ControllerScenario>& scenarios() const { return scenarios_; }
  std::uint64_t requests_sent() const { return request_counter_; }

 private:
  RunConfig config_;
  RequestEvaluator* backend_;
  std::vector<ControllerScenario> scenarios_;
  std::unordered_map<std::string, double> cache_;  // morphology RLE -> fitness
  std::uint64_t request_counter_ = 0;
};

}  // namespace evovox
