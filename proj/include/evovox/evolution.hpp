#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "evovox/genome.hpp"
#include "evovox/rng.hpp"

namespace evovox {

struct Species {
  int id = 0;
  CppnGenome representative;
  std::vector<std::size_t> members;  // indices into the generation's population
  int stagnation = 0;
  double best_fitness_ever = -std::numeric_limits<double>::infinity();
};

struct GenerationStats {
  int generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  // Species count under NEAT, Pareto-front size under the age-fitness baseline.
  int group_count = 0;
  CppnGenome best_genome;
};

struct EvolutionRecord {
  std::vector<GenerationStats> generations;
};

std::string evolution_record_csv(const EvolutionRecord& record);
nlohmann::json evolution_record_to_json(const EvolutionRecord& record);
EvolutionRecord evolution_record_from_json(const nlohmann::json& j);

// Evaluates a whole generation at once (the fan-out point for concurrent or
// remote evaluation); must return one fitness per genome, in order.
using PopulationEvaluator =
    std::function<std::vector<double>(const std::vector<CppnGenome>&)>;

struct EvolveOptions {
  NeatParams params;
  int input_count = 3;
  int output_count = 2;
  int checkpoint_interval = 50;  // generations between checkpoints; 0 disables
  // Receives the checkpoint document; also invoked before an abort propagates.
  std::function<void(const nlohmann::json&, int generation)> checkpoint_sink;
  // Invoked after each generation is evaluated and recorded.
  std::function<void(const GenerationStats&)> on_generation;
};

struct EvolveResult {
  CppnGenome best_genome;
  double best_fitness = -std::numeric_limits<double>::infinity();
  EvolutionRecord record;
};

// Assigns each genome to the first species (previous first, then any species
// founded during this pass) whose representative is within the compatibility
// threshold; refreshes stagnation counters and re-draws representatives for
// the next generation from current members (closest to the old representative,
// ties to the lower genome serial).
std::vector<Species> speciate(const std::vector<CppnGenome>& population,
                              const std::vector<double>& fitness,
                              std::vector<Species> previous, const NeatParams& params,
                              int& next_species_id);

// Produces exactly population_size offspring: quotas by largest remainder over
// per-species fitness-shared means, survival-threshold parent truncation,
// champion elitism for species larger than five members, stagnation culling
// (the species holding the population best is immune), and an unconditional
// copy of the population champion so the best fitness never regresses.
std::vector<CppnGenome> reproduce(const std::vector<CppnGenome>& population,
                                  const std::vector<double>& fitness,
                                  const std::vector<Species>& species,
                                  const NeatParams& params, InnovationRegistry& registry,
                                  RandomSource& rng);

EvolveResult evolve_neat(const EvolveOptions& options, const PopulationEvaluator& evaluator,
                         InnovationRegistry& registry, RandomSource& rng);

struct AfpoIndividual {
  CppnGenome genome;
  int age = 0;
  double fitness = 0.0;
};

// Non-dominated indices under (maximize fitness, minimize age): a point
// dominates another iff fitness >= and age <= with at least one strict.
std::vector<std::size_t> pareto_front(const std::vector<std::pair<double, int>>& points);

EvolveResult evolve_afpo(const EvolveOptions& options, const PopulationEvaluator& evaluator,
                         InnovationRegistry& registry, RandomSource& rng);

// Everything needed to resume a run: population (plus ages for the age-fitness
// baseline), species representatives, RNG engine state, innovation watermarks,
// and the record so far. Fitness may be empty when a checkpoint is written
// after an aborted evaluation.
struct CheckpointState {
  std::string algorithm;  // "neat" or "afpo"
  int generation = 0;
  std::vector<CppnGenome> population;
  std::vector<int> ages;
  std::vector<double> fitness;
  std::vector<Species> species;  // members are per-generation and not persisted
  int next_species_id = 0;
  std::string rng_state;
  EvolutionRecord record;
  std::int64_t innovation_watermark = 0;
  int node_id_watermark = 0;
  std::uint64_t serial_watermark = 0;
};

nlohmann::json checkpoint_to_json(const CheckpointState& state);
CheckpointState checkpoint_from_json(const nlohmann::json& j);

}  // namespace evovox
