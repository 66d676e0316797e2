#include "evovox/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "evovox/util.hpp"

namespace evovox {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Shared tie-break: higher fitness wins, equal fitness goes to the lower
// genome serial so outcomes never depend on container order.
bool beats(double fa, std::uint64_t sa, double fb, std::uint64_t sb) {
  if (fa != fb) return fa > fb;
  return sa < sb;
}

std::size_t best_index(const std::vector<CppnGenome>& population,
                       const std::vector<double>& fitness) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (beats(fitness[i], population[i].serial, fitness[best], population[best].serial)) {
      best = i;
    }
  }
  return best;
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

nlohmann::json species_to_json(const Species& s) {
  nlohmann::json j;
  j["id"] = s.id;
  j["representative"] = genome_to_json(s.representative);
  j["stagnation"] = s.stagnation;
  j["best_fitness_ever"] = s.best_fitness_ever;
  return j;
}

Species species_from_json(const nlohmann::json& j) {
  Species s;
  s.id = j.at("id").get<int>();
  s.representative = genome_from_json(j.at("representative"));
  s.stagnation = j.at("stagnation").get<int>();
  s.best_fitness_ever = j.at("best_fitness_ever").get<double>();
  return s;
}

}  // namespace

std::string evolution_record_csv(const EvolutionRecord& record) {
  std::string out = "generation,best_fitness,mean_fitness,group_count\n";
  for (const auto& g : record.generations) {
    out += csv_row({std::to_string(g.generation), format_double(g.best_fitness),
                    format_double(g.mean_fitness), std::to_string(g.group_count)});
  }
  return out;
}

nlohmann::json evolution_record_to_json(const EvolutionRecord& record) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : record.generations) {
    nlohmann::json e;
    e["generation"] = g.generation;
    e["best_fitness"] = g.best_fitness;
    e["mean_fitness"] = g.mean_fitness;
    e["group_count"] = g.group_count;
    e["best_genome"] = genome_to_json(g.best_genome);
    arr.push_back(std::move(e));
  }
  return nlohmann::json{{"generations", std::move(arr)}};
}

EvolutionRecord evolution_record_from_json(const nlohmann::json& j) {
  EvolutionRecord record;
  for (const auto& e : j.at("generations")) {
    GenerationStats g;
    g.generation = e.at("generation").get<int>();
    g.best_fitness = e.at("best_fitness").get<double>();
    g.mean_fitness = e.at("mean_fitness").get<double>();
    g.group_count = e.at("group_count").get<int>();
    g.best_genome = genome_from_json(e.at("best_genome"));
    record.generations.push_back(std::move(g));
  }
  return record;
}

std::vector<Species> speciate(const std::vector<CppnGenome>& population,
                              const std::vector<double>& fitness,
                              std::vector<Species> previous, const NeatParams& params,
                              int& next_species_id) {
  if (fitness.size() != population.size()) {
    throw std::invalid_argument("speciate: fitness/population size mismatch");
  }
  std::vector<Species> species = std::move(previous);
  for (auto& s : species) s.members.clear();

  for (std::size_t i = 0; i < population.size(); ++i) {
    bool placed = false;
    for (auto& s : species) {
      if (distance(population[i], s.representative, params) <
          params.compatibility_threshold) {
        s.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Species fresh;
      fresh.id = next_species_id++;
      fresh.representative = population[i];
      fresh.members.push_back(i);
      species.push_back(std::move(fresh));
    }
  }

  std::erase_if(species, [](const Species& s) { return s.members.empty(); });

  for (auto& s : species) {
    double best = kNegInf;
    for (std::size_t i : s.members) best = std::max(best, fitness[i]);
    if (best > s.best_fitness_ever) {
      s.best_fitness_ever = best;
      s.stagnation = 0;
    } else {
      s.stagnation += 1;
    }
    // Next generation's representative: the member closest to the one that
    // anchored this species this generation.
    std::size_t pick = s.members.front();
    double pick_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i : s.members) {
      double d = distance(population[i], s.representative, params);
      if (d < pick_distance ||
          (d == pick_distance && population[i].serial < population[pick].serial)) {
        pick_distance = d;
        pick = i;
      }
    }
    s.representative = population[pick];
  }
  return species;
}

std::vector<CppnGenome> reproduce(const std::vector<CppnGenome>& population,
                                  const std::vector<double>& fitness,
                                  const std::vector<Species>& species,
                                  const NeatParams& params, InnovationRegistry& registry,
                                  RandomSource& rng) {
  if (population.empty() || fitness.size() != population.size() || species.empty()) {
    throw std::invalid_argument("reproduce: inconsistent population state");
  }
  const int total = params.population_size;
  const std::size_t champion = best_index(population, fitness);

  // Stagnant species stop reproducing, except the one holding the champion.
  std::vector<const Species*> live;
  for (const auto& s : species) {
    bool holds_champion =
        std::find(s.members.begin(), s.members.end(), champion) != s.members.end();
    if (s.stagnation >= params.max_stagnation && !holds_champion) continue;
    live.push_back(&s);
  }
  std::sort(live.begin(), live.end(),
            [](const Species* a, const Species* b) { return a->id < b->id; });

  // Fitness sharing: each species weighs in with the sum of its members'
  // fitness divided by its size squared (the mean of member/size shares).
  // Fitness is shifted so the weights stay nonnegative even for raw scores
  // below zero.
  double min_fitness = *std::min_element(fitness.begin(), fitness.end());
  std::vector<double> weight(live.size(), 0.0);
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < live.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i : live[k]->members) sum += fitness[i] - min_fitness;
    double size = static_cast<double>(live[k]->members.size());
    weight[k] = sum / (size * size);
    weight_sum += weight[k];
  }

  // Largest-remainder apportionment; remainder ties go to the lower species id.
  std::vector<int> quota(live.size(), 0);
  std::vector<double> remainder(live.size(), 0.0);
  int assigned = 0;
  for (std::size_t k = 0; k < live.size(); ++k) {
    double share = weight_sum > 0.0
                       ? weight[k] / weight_sum * static_cast<double>(total)
                       : static_cast<double>(total) / static_cast<double>(live.size());
    quota[k] = static_cast<int>(std::floor(share));
    remainder[k] = share - std::floor(share);
    assigned += quota[k];
  }
  std::vector<std::size_t> order(live.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    return live[a]->id < live[b]->id;
  });
  for (std::size_t k = 0; assigned < total; ++k) {
    quota[order[k % order.size()]] += 1;
    assigned += 1;
  }

  std::vector<CppnGenome> next;
  next.reserve(static_cast<std::size_t>(total));
  bool champion_copied = false;
  for (std::size_t k = 0; k < live.size(); ++k) {
    int n = quota[k];
    if (n == 0) continue;
    std::vector<std::size_t> ranked = live[k]->members;
    std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
      return beats(fitness[a], population[a].serial, fitness[b], population[b].serial);
    });
    if (ranked.size() > 5) {
      next.push_back(population[ranked.front()]);
      if (ranked.front() == champion) champion_copied = true;
      n -= 1;
    }
    std::size_t parent_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(
               std::ceil(params.survival_threshold * static_cast<double>(ranked.size()))));
    parent_count = std::min(parent_count, ranked.size());
    for (int j = 0; j < n; ++j) {
      std::size_t a = ranked[rng.uniform_index(parent_count)];
      std::size_t b = ranked[rng.uniform_index(parent_count)];
      if (!beats(fitness[a], population[a].serial, fitness[b], population[b].serial)) {
        std::swap(a, b);
      }
      CppnGenome child = crossover(population[a], population[b], registry, rng);
      next.push_back(mutate(child, params, registry, rng));
    }
  }

  // The champion survives verbatim even when its species was too small for
  // elitism, so the population best never regresses between generations.
  if (!champion_copied) next.back() = population[champion];
  return next;
}

namespace {

CheckpointState make_checkpoint(const std::string& algorithm, int generation,
                                const std::vector<CppnGenome>& population,
                                const std::vector<int>& ages,
                                const std::vector<double>& fitness,
                                const std::vector<Species>& species, int next_species_id,
                                const RandomSource& rng, const EvolutionRecord& record,
                                const InnovationRegistry& registry) {
  CheckpointState state;
  state.algorithm = algorithm;
  state.generation = generation;
  state.population = population;
  state.ages = ages;
  state.fitness = fitness;
  state.species = species;
  state.next_species_id = next_species_id;
  state.rng_state = rng.save_state();
  state.record = record;
  state.innovation_watermark = registry.innovation_watermark();
  state.node_id_watermark = registry.node_id_watermark();
  state.serial_watermark = registry.serial_watermark();
  return state;
}

}  // namespace

EvolveResult evolve_neat(const EvolveOptions& options, const PopulationEvaluator& evaluator,
                         InnovationRegistry& registry, RandomSource& rng) {
  options.params.validate();
  const NeatParams& params = options.params;

  std::vector<CppnGenome> population;
  population.reserve(static_cast<std::size_t>(params.population_size));
  for (int i = 0; i < params.population_size; ++i) {
    population.push_back(
        make_initial_genome(options.input_count, options.output_count, registry, rng));
  }

  std::vector<Species> species;
  int next_species_id = 0;
  EvolveResult result;

  auto emit_checkpoint = [&](int generation, const std::vector<double>& fitness) {
    if (!options.checkpoint_sink) return;
    CheckpointState state =
        make_checkpoint("neat", generation, population, {}, fitness, species,
                        next_species_id, rng, result.record, registry);
    options.checkpoint_sink(checkpoint_to_json(state), generation);
  };

  for (int g = 0;; ++g) {
    std::vector<double> fitness;
    try {
      fitness = evaluator(population);
    } catch (...) {
      emit_checkpoint(g, {});
      throw;
    }
    if (fitness.size() != population.size()) {
      throw std::runtime_error("evolve: evaluator returned wrong fitness count");
    }
    species = speciate(population, fitness, std::move(species), params, next_species_id);

    std::size_t bi = best_index(population, fitness);
    GenerationStats stats;
    stats.generation = g;
    stats.best_fitness = fitness[bi];
    stats.mean_fitness = mean_of(fitness);
    stats.group_count = static_cast<int>(species.size());
    stats.best_genome = population[bi];
    result.record.generations.push_back(stats);
    if (options.on_generation) options.on_generation(stats);
    if (beats(fitness[bi], population[bi].serial, result.best_fitness,
              result.best_genome.serial)) {
      result.best_fitness = fitness[bi];
      result.best_genome = population[bi];
    }

    if (options.checkpoint_interval > 0 && g > 0 &&
        g % options.checkpoint_interval == 0) {
      emit_checkpoint(g, fitness);
    }
    if (g == params.generations) break;

    registry.begin_generation();
    population = reproduce(population, fitness, species, params, registry, rng);
  }
  return result;
}

std::vector<std::size_t> pareto_front(const std::vector<std::pair<double, int>>& points) {
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].second != points[b].second) return points[a].second < points[b].second;
    if (points[a].first != points[b].first) return points[a].first > points[b].first;
    return a < b;
  });

  std::vector<std::size_t> front;
  double best_lower_age = kNegInf;  // best fitness among strictly younger points
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    int age = points[order[i]].second;
    double group_max = points[order[i]].first;
    while (j < order.size() && points[order[j]].second == age) ++j;
    if (group_max > best_lower_age) {
      for (std::size_t k = i; k < j; ++k) {
        if (points[order[k]].first == group_max) front.push_back(order[k]);
      }
    }
    best_lower_age = std::max(best_lower_age, group_max);
    i = j;
  }
  std::sort(front.begin(), front.end());
  return front;
}

EvolveResult evolve_afpo(const EvolveOptions& options, const PopulationEvaluator& evaluator,
                         InnovationRegistry& registry, RandomSource& rng) {
  options.params.validate();
  const NeatParams& params = options.params;
  const std::size_t total = static_cast<std::size_t>(params.population_size);

  std::vector<AfpoIndividual> population;
  population.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    AfpoIndividual ind;
    ind.genome =
        make_initial_genome(options.input_count, options.output_count, registry, rng);
    population.push_back(std::move(ind));
  }

  EvolveResult result;

  auto emit_checkpoint = [&](int generation, const std::vector<double>& fitness) {
    if (!options.checkpoint_sink) return;
    std::vector<CppnGenome> genomes;
    std::vector<int> ages;
    for (const auto& ind : population) {
      genomes.push_back(ind.genome);
      ages.push_back(ind.age);
    }
    CheckpointState state = make_checkpoint("afpo", generation, genomes, ages, fitness,
                                            {}, 0, rng, result.record, registry);
    options.checkpoint_sink(checkpoint_to_json(state), generation);
  };

  for (int g = 0;; ++g) {
    std::vector<CppnGenome> genomes;
    genomes.reserve(total);
    for (const auto& ind : population) genomes.push_back(ind.genome);
    std::vector<double> fitness;
    try {
      fitness = evaluator(genomes);
    } catch (...) {
      emit_checkpoint(g, {});
      throw;
    }
    if (fitness.size() != population.size()) {
      throw std::runtime_error("evolve: evaluator returned wrong fitness count");
    }
    for (std::size_t i = 0; i < population.size(); ++i) population[i].fitness = fitness[i];

    std::vector<std::pair<double, int>> points;
    points.reserve(population.size());
    for (const auto& ind : population) points.emplace_back(ind.fitness, ind.age);
    std::vector<std::size_t> front = pareto_front(points);

    std::size_t bi = best_index(genomes, fitness);
    GenerationStats stats;
    stats.generation = g;
    stats.best_fitness = fitness[bi];
    stats.mean_fitness = mean_of(fitness);
    stats.group_count = static_cast<int>(front.size());
    stats.best_genome = genomes[bi];
    result.record.generations.push_back(stats);
    if (options.on_generation) options.on_generation(stats);
    if (beats(fitness[bi], genomes[bi].serial, result.best_fitness,
              result.best_genome.serial)) {
      result.best_fitness = fitness[bi];
      result.best_genome = genomes[bi];
    }

    if (options.checkpoint_interval > 0 && g > 0 &&
        g % options.checkpoint_interval == 0) {
      emit_checkpoint(g, fitness);
    }
    if (g == params.generations) break;

    registry.begin_generation();
    // Aging shifts every point equally, so the front computed above is still
    // the front afterwards.
    for (auto& ind : population) ind.age += 1;

    std::vector<std::size_t> survivors = front;
    std::sort(survivors.begin(), survivors.end(), [&](std::size_t a, std::size_t b) {
      return beats(population[a].fitness, population[a].genome.serial,
                   population[b].fitness, population[b].genome.serial);
    });
    if (survivors.size() > total - 1) survivors.resize(total - 1);

    std::vector<AfpoIndividual> next;
    next.reserve(total);
    for (std::size_t i : survivors) next.push_back(population[i]);
    while (next.size() < total - 1) {
      const AfpoIndividual& parent = population[survivors[rng.uniform_index(survivors.size())]];
      AfpoIndividual child;
      child.genome = mutate(parent.genome, params, registry, rng);
      child.age = parent.age;
      next.push_back(std::move(child));
    }
    AfpoIndividual fresh;
    fresh.genome =
        make_initial_genome(options.input_count, options.output_count, registry, rng);
    next.push_back(std::move(fresh));
    population = std::move(next);
  }
  return result;
}

nlohmann::json checkpoint_to_json(const CheckpointState& state) {
  nlohmann::json j;
  j["algorithm"] = state.algorithm;
  j["generation"] = state.generation;
  nlohmann::json pop = nlohmann::json::array();
  for (const auto& g : state.population) pop.push_back(genome_to_json(g));
  j["population"] = std::move(pop);
  j["ages"] = state.ages;
  j["fitness"] = state.fitness;
  nlohmann::json sp = nlohmann::json::array();
  for (const auto& s : state.species) sp.push_back(species_to_json(s));
  j["species"] = std::move(sp);
  j["next_species_id"] = state.next_species_id;
  j["rng_state"] = state.rng_state;
  j["record"] = evolution_record_to_json(state.record);
  j["innovation_watermark"] = state.innovation_watermark;
  j["node_id_watermark"] = state.node_id_watermark;
  j["serial_watermark"] = state.serial_watermark;
  return j;
}

CheckpointState checkpoint_from_json(const nlohmann::json& j) {
  CheckpointState state;
  state.algorithm = j.at("algorithm").get<std::string>();
  if (state.algorithm != "neat" && state.algorithm != "afpo") {
    throw std::invalid_argument("checkpoint: unknown algorithm " + state.algorithm);
  }
  state.generation = j.at("generation").get<int>();
  for (const auto& g : j.at("population")) {
    state.population.push_back(genome_from_json(g));
  }
  state.ages = j.at("ages").get<std::vector<int>>();
  state.fitness = j.at("fitness").get<std::vector<double>>();
  for (const auto& s : j.at("species")) state.species.push_back(species_from_json(s));
  state.next_species_id = j.at("next_species_id").get<int>();
  state.rng_state = j.at("rng_state").get<std::string>();
  state.record = evolution_record_from_json(j.at("record"));
  state.innovation_watermark = j.at("innovation_watermark").get<std::int64_t>();
  state.node_id_watermark = j.at("node_id_watermark").get<int>();
  state.serial_watermark = j.at("serial_watermark").get<std::uint64_t>();
  return state;
}

}  // namespace evovox
