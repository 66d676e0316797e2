// Acceptance gate: eight end-to-end criteria, one [PASS]/[FAIL] line each.
// Criterion 6's sub-check (b) is a soft expectation and downgrades to a
// [WARN] note instead of failing the criterion.
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "evovox/eval_client.hpp"
#include "evovox/eval_server.hpp"
#include "evovox/evolution.hpp"
#include "evovox/fitness.hpp"
#include "evovox/genome.hpp"
#include "evovox/morphology.hpp"
#include "evovox/rng.hpp"
#include "evovox/run_config.hpp"
#include "evovox/scenario.hpp"
#include "evovox/simulator.hpp"
#include "evovox/stats.hpp"
#include "evovox/util.hpp"
#include "evovox/wire.hpp"

#include "oracles.hpp"

using namespace evovox;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Morphology bar_morphology(int nx, const std::vector<VoxelState>& states) {
  Morphology m = make_empty_morphology(LatticeDims{nx, 1, 1});
  for (int x = 0; x < nx; ++x) m.at(x, 0, 0) = states[static_cast<std::size_t>(x)];
  return m;
}

Morphology solid_block(int nx, int ny, int nz, VoxelState fill) {
  Morphology m = make_empty_morphology(LatticeDims{nx, ny, nz});
  for (auto& v : m.grid) v = fill;
  return m;
}

double total_mass(const MassSpringSystem& sys) {
  return std::accumulate(sys.mass.begin(), sys.mass.end(), 0.0);
}

// ---------------------------------------------------------------------------
// Criterion 1: fitness arithmetic anchors.
bool criterion_fitness(std::string& detail) {
  const FitnessConfig cfg;  // delta_max 20, upsilon_max 448, combined, clamped
  const double volume = volume_score(224, cfg);
  const double displacement = displacement_score(2.837, cfg);
  SimulationResult r;
  r.displacement = 4.298;
  r.voxel_count = 128;
  r.status = SimStatus::kOk;
  const FitnessValue combined = combined_fitness(r, cfg);

  bool ok = volume == 0.5;
  ok = ok && std::abs(displacement - 0.14185) <= 1e-12;
  ok = ok && std::abs(combined.value - 0.46459) <= 1e-5;
  ok = ok && combined.value == 0.5 * combined.delta_score + 0.5 * combined.nu_score;

  std::ostringstream s;
  s << "volume(224)=" << volume << ", displacement(2.837)=" << displacement
    << ", combined(4.298,128)=" << combined.value;
  detail = s.str();
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 2: Kruskal-Wallis against hand value and a permutation oracle.
bool criterion_statistics(std::string& detail) {
  const KruskalWallisResult anchor =
      kruskal_wallis({{"a", {1, 2, 3}}, {"b", {4, 5, 6}}, {"c", {7, 8, 9}}});
  bool ok = anchor.df == 2 && std::abs(anchor.H - 7.2) <= 1e-12;

  // 100 random datasets; the chi-square p must sit inside the permutation
  // estimate's 99% Monte-Carlo interval. At 99% coverage a small number of
  // excursions is the expected behaviour of a correct implementation.
  RandomSource rng(4242);
  int outside = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SampleGroup> groups(3);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      groups[g].label = std::string(1, static_cast<char>('a' + g));
      const std::size_t n = 30 + rng.uniform_index(16);
      const double shift = rng.gaussian(0.0, 0.3);
      for (std::size_t i = 0; i < n; ++i) {
        groups[g].values.push_back(shift + rng.gaussian(0.0, 1.0));
      }
    }
    const KruskalWallisResult lib = kruskal_wallis(groups);
    const oracles::PermutationP perm =
        oracles::permutation_kw_p(groups, 10000, 1000 + static_cast<std::uint64_t>(trial));
    if (std::abs(lib.p_value - perm.p) > perm.half_width) outside += 1;
  }
  ok = ok && outside <= 5;

  std::ostringstream s;
  s << "H=" << anchor.H << " df=" << anchor.df << ", " << (100 - outside)
    << "/100 datasets inside the 99% permutation interval";
  detail = s.str();
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 3: scenario phases are shared across morphologies; robustness
// sweeps are byte-reproducible.
bool criterion_scenarios(std::string& detail) {
  bool ok = true;

  // Phases depend only on (master seed, scenario id, coordinate): two
  // different occupancies, and even two different lattices, agree wherever
  // they overlap.
  const LatticeDims big{8, 8, 7};
  const LatticeDims small{5, 6, 4};
  for (int id : {0, 7, 499}) {
    const ControllerScenario scenario{910, id};
    for (int z = 0; z < small.nz; ++z)
      for (int y = 0; y < small.ny; ++y)
        for (int x = 0; x < small.nx; ++x) {
          const double a = phase_offset(scenario, x, y, z, big);
          const double b = phase_offset(scenario, x, y, z, small);
          ok = ok && a == b && a >= 0.0 && a < 6.2831853071795865;
        }
  }

  // Two independent robustness sweeps of the same morphology produce
  // byte-identical CSVs.
  const Morphology bar = bar_morphology(
      3, {VoxelState::kActive, VoxelState::kPassive, VoxelState::kActive});
  SimConfig sim;
  sim.settle_duration = 0.05;
  sim.run_duration = 0.2;
  FitnessConfig fitness;
  fitness.upsilon_max = bar.dims.volume();
  std::vector<ControllerScenario> scenarios;
  for (int id = 0; id < 6; ++id) scenarios.push_back(ControllerScenario{2024, id});

  auto sweep = [&]() {
    const std::vector<SimulationResult> results =
        local_batch_evaluator()(bar, scenarios, sim);
    std::vector<FitnessValue> values;
    for (const SimulationResult& r : results) values.push_back(combined_fitness(r, fitness));
    return robustness_csv(scenarios, results, values);
  };
  const std::string first = sweep();
  const std::string second = sweep();
  ok = ok && !first.empty() && first == second;

  detail = "phases lattice-independent; repeated sweep CSVs identical";
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 4: simulator sanity — settling, momentum, timestep, mirror.
bool criterion_simulator(std::string& detail) {
  std::ostringstream s;
  bool ok = true;

  // (i) All-passive block on the full 1 s + 10 s schedule barely drifts.
  {
    const SimConfig cfg;  // default schedule
    const SimulationResult r =
        simulate(solid_block(2, 2, 2, VoxelState::kPassive), ControllerScenario{3, 0}, cfg);
    ok = ok && r.status == SimStatus::kOk && r.displacement < 0.05;
    s << "passive drift " << r.displacement;
  }

  // (ii) Airborne actuated bar: horizontal momentum stays at numerical zero.
  {
    SimConfig cfg;
    cfg.enable_ground = false;
    MassSpringSystem sys = build_lattice(solid_block(3, 1, 1, VoxelState::kActive), cfg);
    assign_phases(sys, ControllerScenario{11, 0});
    const int steps = 30000;  // 3 simulated seconds
    advance(sys, cfg, steps, true);
    const Vec3 p = momentum(sys);
    const double duration = steps * cfg.timestep;
    const double drift =
        std::max(std::abs(p.x), std::abs(p.y)) / (total_mass(sys) * duration);
    ok = ok && !sys.unstable && drift <= 1e-10;
    s << ", momentum drift " << drift << "/s";
  }

  // (iii) Halving the timestep moves the active bar's displacement < 5%.
  {
    SimConfig cfg;
    cfg.settle_duration = 0.5;
    cfg.run_duration = 3.0;
    const Morphology bar = solid_block(4, 1, 1, VoxelState::kActive);
    const ControllerScenario scenario{5, 0};
    const SimulationResult coarse = simulate(bar, scenario, cfg);
    cfg.timestep = 5e-5;
    const SimulationResult fine = simulate(bar, scenario, cfg);
    const double rel = std::abs(coarse.displacement - fine.displacement) /
                       std::max(std::abs(fine.displacement), 1e-9);
    ok = ok && coarse.status == SimStatus::kOk && fine.status == SimStatus::kOk;
    ok = ok && coarse.displacement > 0.05 && rel < 0.05;
    s << ", dt-halving rel " << rel << " (d " << fine.displacement << ")";
  }

  // (iv) Mirroring the morphology and its phase field mirrors the gait.
  {
    SimConfig cfg;
    cfg.settle_duration = 0.2;
    cfg.run_duration = 1.0;
    const LatticeDims dims{4, 2, 2};
    Morphology base = make_empty_morphology(dims);
    base.at(0, 0, 0) = VoxelState::kActive;
    base.at(1, 0, 0) = VoxelState::kActive;
    base.at(2, 0, 0) = VoxelState::kPassive;
    base.at(3, 0, 0) = VoxelState::kActive;
    base.at(0, 1, 0) = VoxelState::kActive;
    base.at(0, 0, 1) = VoxelState::kPassive;
    base.at(1, 1, 0) = VoxelState::kActive;
    Morphology mirrored = make_empty_morphology(dims);
    for (int z = 0; z < dims.nz; ++z)
      for (int y = 0; y < dims.ny; ++y)
        for (int x = 0; x < dims.nx; ++x)
          mirrored.at(dims.nx - 1 - x, y, z) = base.at(x, y, z);

    const ControllerScenario scenario{13, 0};
    MassSpringSystem a = build_lattice(base, cfg);
    MassSpringSystem b = build_lattice(mirrored, cfg);
    assign_phases(a, scenario);
    std::vector<double> mirrored_phases;
    for (const std::array<int, 3>& v : b.active_voxels) {
      mirrored_phases.push_back(
          phase_offset(scenario, dims.nx - 1 - v[0], v[1], v[2], dims));
    }
    assign_phases(b, mirrored_phases);

    auto run = [&](MassSpringSystem& sys) {
      advance(sys, cfg, 2000, false);
      const Vec3 settled = com(sys);
      advance(sys, cfg, 10000, true);
      const Vec3 final_com = com(sys);
      const double dx = final_com.x - settled.x;
      const double dy = final_com.y - settled.y;
      const double dz = final_com.z - settled.z;
      return std::sqrt(dx * dx + dy * dy + dz * dz) / cfg.voxel_edge;
    };
    const double d_base = run(a);
    const double d_mirror = run(b);
    ok = ok && !a.unstable && !b.unstable && std::abs(d_base - d_mirror) <= 1e-9;
    s << ", mirror gap " << std::abs(d_base - d_mirror);
  }

  detail = s.str();
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 5: local and HTTP evaluation agree; load balancing and failover.
bool criterion_protocol(std::string& detail) {
  bool ok = true;
  std::ostringstream s;

  SimConfig sim;
  sim.settle_duration = 0.05;
  sim.run_duration = 0.2;

  auto fixture = [&](int index, const std::string& prefix) {
    const int length = 2 + index % 5;
    std::vector<VoxelState> states;
    for (int x = 0; x < length; ++x) {
      states.push_back((x + index) % 3 == 2 ? VoxelState::kPassive : VoxelState::kActive);
    }
    states[0] = VoxelState::kActive;  // at least one actuator
    EvaluationRequest request;
    request.request_id = prefix + "-" + std::to_string(index);
    request.morphology = bar_morphology(length, states);
    request.scenario = ControllerScenario{400 + static_cast<std::uint64_t>(index % 7),
                                          index % 11};
    request.sim_config = sim;
    request.fitness_config.upsilon_max = length;
    return request;
  };

  // (i) 20 fixtures, local vs HTTP: semantically identical, in order.
  {
    std::vector<EvaluationRequest> requests;
    for (int i = 0; i < 20; ++i) requests.push_back(fixture(i, "fix"));
    LocalEvaluator local(1);
    const std::vector<EvaluationResponse> local_responses = local.evaluate_all(requests);

    EvalServerConfig server_cfg;
    server_cfg.worker_count = 2;
    EvalServer server(server_cfg);
    server.start();
    RemoteEvaluator remote(ServerPool{{server.base_url()}, 3, 60.0});
    const std::vector<EvaluationResponse> remote_responses = remote.evaluate_all(requests);
    server.stop();

    ok = ok && local_responses.size() == 20 && remote_responses.size() == 20;
    for (std::size_t i = 0; ok && i < requests.size(); ++i) {
      ok = semantically_equal(local_responses[i], remote_responses[i]) &&
           remote_responses[i].request_id == requests[i].request_id;
    }
    s << "local/remote equal on 20 fixtures";
  }

  // (ii) Two 4-worker servers, 50 requests: all complete, peak <= 4 each.
  {
    EvalServerConfig cfg_a;
    cfg_a.worker_count = 4;
    cfg_a.server_id = "pool-a";
    EvalServerConfig cfg_b;
    cfg_b.worker_count = 4;
    cfg_b.server_id = "pool-b";
    EvalServer server_a(cfg_a);
    EvalServer server_b(cfg_b);
    server_a.start();
    server_b.start();

    std::vector<EvaluationRequest> requests;
    for (int i = 0; i < 50; ++i) requests.push_back(fixture(i, "load"));
    const std::vector<EvaluationResponse> responses = dispatch_generation(
        ServerPool{{server_a.base_url(), server_b.base_url()}, 3, 60.0}, requests);
    server_a.stop();
    server_b.stop();

    ok = ok && responses.size() == 50;
    int ok_count = 0;
    for (std::size_t i = 0; i < responses.size(); ++i) {
      if (responses[i].status == "ok" && responses[i].request_id == requests[i].request_id)
        ok_count += 1;
    }
    ok = ok && ok_count == 50;
    ok = ok && server_a.peak_in_flight() <= 4 && server_b.peak_in_flight() <= 4;
    s << "; 50/50 across 2x4 workers (peaks " << server_a.peak_in_flight() << "/"
      << server_b.peak_in_flight() << ")";
  }

  // (iii) One dead endpoint: the generation still completes cleanly.
  {
    EvalServerConfig cfg;
    cfg.worker_count = 2;
    EvalServer server(cfg);
    server.start();
    std::vector<EvaluationRequest> requests;
    for (int i = 0; i < 20; ++i) requests.push_back(fixture(i, "failover"));
    const std::vector<EvaluationResponse> responses = dispatch_generation(
        ServerPool{{"http://127.0.0.1:9", server.base_url()}, 3, 60.0}, requests);
    server.stop();
    ok = ok && responses.size() == 20;
    for (const EvaluationResponse& r : responses) ok = ok && r.status == "ok";
    s << "; dead endpoint tolerated";
  }

  detail = s.str();
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: genetic-operator properties.
bool criterion_operators(std::string& detail) {
  bool ok = true;
  std::ostringstream s;

  // Feed-forwardness across 10^5 mutations (100 chains x 1000).
  {
    NeatParams params;
    InnovationRegistry registry;
    RandomSource rng(97);
    int checked = 0;
    for (int chain = 0; ok && chain < 100; ++chain) {
      registry.begin_generation();
      CppnGenome g = make_initial_genome(3, 2, registry, rng);
      for (int step = 0; step < 1000; ++step) {
        if (step % 50 == 0) registry.begin_generation();
        g = mutate(g, params, registry, rng);
        checked += 1;
        if (!is_feed_forward(g)) {
          ok = false;
          break;
        }
      }
    }
    s << "feed-forward after " << checked << " mutations";
  }

  // Innovation reuse inside one generation window, fresh numbers after.
  {
    InnovationRegistry registry;
    registry.begin_generation();
    const std::int64_t first = registry.connection_innovation(4, 9);
    ok = ok && registry.connection_innovation(4, 9) == first;
    const InnovationRegistry::NodeSplit split_a = registry.node_split(first, 4, 9);
    const InnovationRegistry::NodeSplit split_b = registry.node_split(first, 4, 9);
    ok = ok && split_a.node_id == split_b.node_id &&
         split_a.in_innovation == split_b.in_innovation &&
         split_a.out_innovation == split_b.out_innovation;
    registry.begin_generation();
    ok = ok && registry.connection_innovation(4, 9) != first;
    s << "; innovation reuse per generation";
  }

  // Distance: identity and symmetry over 1000 random pairs.
  {
    NeatParams params;
    InnovationRegistry registry;
    RandomSource rng(121);
    std::vector<CppnGenome> pool;
    for (int i = 0; i < 40; ++i) {
      registry.begin_generation();
      CppnGenome g = make_initial_genome(3, 2, registry, rng);
      const std::size_t extra = rng.uniform_index(40);
      for (std::size_t k = 0; k < extra; ++k) g = mutate(g, params, registry, rng);
      pool.push_back(std::move(g));
    }
    double worst_asymmetry = 0.0;
    for (int pair = 0; ok && pair < 1000; ++pair) {
      const CppnGenome& a = pool[rng.uniform_index(pool.size())];
      const CppnGenome& b = pool[rng.uniform_index(pool.size())];
      if (distance(a, a, params) != 0.0) ok = false;
      worst_asymmetry =
          std::max(worst_asymmetry, std::abs(distance(a, b, params) - distance(b, a, params)));
    }
    ok = ok && worst_asymmetry <= 1e-12;
    s << "; distance identity+symmetry (asym " << worst_asymmetry << ")";
  }

  // Pareto front equals brute force up to n = 500.
  {
    RandomSource rng(500);
    for (const std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{17},
                                std::size_t{100}, std::size_t{250}, std::size_t{500}}) {
      std::vector<std::pair<double, int>> points;
      for (std::size_t i = 0; i < n; ++i) {
        const double fitness = std::round(rng.uniform(0.0, 10.0) * 10.0) / 10.0;
        points.emplace_back(fitness, static_cast<int>(rng.uniform_index(8)));
      }
      if (pareto_front(points) != oracles::pareto_oracle(points)) {
        ok = false;
        break;
      }
    }
    s << "; pareto == brute force to n=500";
  }

  detail = s.str();
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: decode oracle.
bool criterion_decode(std::string& detail) {
  bool ok = true;

  // Hand-built CPPN: pv = sin(x - 0.25), m = sigmoid(0) = 0.5. On 8x8x7 the
  // presence field keeps the 3 x-planes with sin > 0, all active.
  CppnGenome g;
  g.input_count = 3;
  g.output_count = 2;
  g.nodes = {
      NodeGene{0, NodeKind::kInput, ActivationFunction::kSigmoid, 0.0},
      NodeGene{1, NodeKind::kInput, ActivationFunction::kSigmoid, 0.0},
      NodeGene{2, NodeKind::kInput, ActivationFunction::kSigmoid, 0.0},
      NodeGene{3, NodeKind::kOutput, ActivationFunction::kSine, -0.25},
      NodeGene{4, NodeKind::kOutput, ActivationFunction::kSigmoid, 0.0},
  };
  g.connections = {ConnectionGene{0, 0, 3, 1.0, true}};

  const LatticeDims dims{8, 8, 7};
  const Morphology decoded = decode(
      [&g](double x, double y, double z) {
        const std::vector<double> out = activate(g, std::array<double, 3>{x, y, z});
        return std::pair<double, double>(out[0], out[1]);
      },
      dims);

  int expected = 0;
  for (int x = 0; x < dims.nx; ++x) {
    if (std::sin(normalize_coord(x, dims.nx) - 0.25) > 0.0) expected += dims.ny * dims.nz;
  }
  ok = ok && expected == 168 && voxel_count(decoded) == 168;
  for (const VoxelState v : decoded.grid) ok = ok && v != VoxelState::kPassive;

  // largest_component against the union-find oracle on 100 random grids.
  RandomSource rng(808);
  for (int trial = 0; ok && trial < 100; ++trial) {
    const LatticeDims d{static_cast<int>(rng.uniform_index(6)) + 1,
                        static_cast<int>(rng.uniform_index(6)) + 1,
                        static_cast<int>(rng.uniform_index(5)) + 1};
    Morphology m = make_empty_morphology(d);
    const double density = rng.uniform(0.2, 0.7);
    for (auto& v : m.grid) {
      if (rng.chance(density)) {
        v = rng.chance(0.5) ? VoxelState::kActive : VoxelState::kPassive;
      }
    }
    const Morphology lib = largest_component(m);
    const Morphology ref = oracles::largest_component_oracle(m);
    ok = lib.dims == ref.dims && lib.grid == ref.grid;
  }

  detail = "half-lattice CPPN -> 168 active voxels; component oracle 100/100";
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 6: scaled evolution reproduction.
RunConfig scaled_config(const std::string& algorithm, std::uint64_t seed) {
  RunConfig config;
  config.algorithm = algorithm;
  config.seed = seed;
  config.params.population_size = 20;
  config.params.generations = 100;
  config.lattice = LatticeDims{4, 4, 3};
  config.sim.settle_duration = 0.3;
  config.sim.run_duration = 1.5;
  config.sim.timestep = 1.25e-4;
  config.fitness.delta_max = 5.0;
  config.fitness.upsilon_max = config.lattice.volume();
  config.checkpoint_interval = 0;
  config.training_scenarios = 1;
  config.validate();
  return config;
}

struct ScaledRun {
  RunConfig config;
  EvolveResult result;
  int best_voxels = 0;
};

ScaledRun run_scaled(const std::string& algorithm, std::uint64_t seed) {
  ScaledRun run;
  run.config = scaled_config(algorithm, seed);
  LocalEvaluator local(1);
  GenomeFitnessPipeline pipeline(run.config, local);

  EvolveOptions options;
  options.params = run.config.params;
  options.input_count = run.config.cppn_inputs();
  options.output_count = run.config.cppn_outputs();
  options.checkpoint_interval = 0;

  InnovationRegistry registry;
  RandomSource rng(derive_seed(run.config.seed, kStreamEvolution));
  run.result = algorithm == "afpo" ? evolve_afpo(options, std::ref(pipeline), registry, rng)
                                   : evolve_neat(options, std::ref(pipeline), registry, rng);
  run.best_voxels = voxel_count(decode_genome(run.result.best_genome, run.config));
  return run;
}

bool criterion_evolution(std::string& detail, std::string& warn) {
  const std::vector<std::string> algorithms{"neat", "hyperneat", "afpo"};
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  std::map<std::string, std::vector<ScaledRun>> runs;

  for (const std::string& algorithm : algorithms) {
    for (const std::uint64_t seed : seeds) {
      const Clock::time_point start = Clock::now();
      ScaledRun run = run_scaled(algorithm, seed);
      const EvolutionRecord& record = run.result.record;
      std::cout << "  run " << algorithm << " seed " << seed << ": gen0 best "
                << format_double(record.generations.front().best_fitness) << ", final best "
                << format_double(run.result.best_fitness) << ", voxels " << run.best_voxels
                << " (" << static_cast<int>(seconds_since(start)) << " s)" << std::endl;
      runs[algorithm].push_back(std::move(run));
    }
  }

  // (a) Final best beats the generation-0 best in >= 2 of 3 seeds, per
  // algorithm. (Hard.)
  std::ostringstream s;
  bool hard_ok = true;
  s << "(a)";
  for (const std::string& algorithm : algorithms) {
    int improved = 0;
    for (const ScaledRun& run : runs[algorithm]) {
      if (run.result.best_fitness > run.result.record.generations.front().best_fitness)
        improved += 1;
    }
    hard_ok = hard_ok && improved >= 2;
    s << " " << algorithm << " " << improved << "/3";
  }

  // (c) NEAT best-fitness curves never decrease, in every run. (Hard.)
  bool monotone = true;
  for (const ScaledRun& run : runs["neat"]) {
    const std::vector<GenerationStats>& g = run.result.record.generations;
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (g[i].best_fitness < g[i - 1].best_fitness) monotone = false;
    }
  }
  hard_ok = hard_ok && monotone;
  s << "; (c) neat curves " << (monotone ? "non-decreasing" : "DECREASED");

  // (b) HyperNEAT's best morphology is no bigger than AFPO's in >= 2 of 3
  // seeds. (Soft: warn on miss, still report.)
  int leaner = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (runs["hyperneat"][i].best_voxels <= runs["afpo"][i].best_voxels) leaner += 1;
  }
  s << "; (b) hyperneat<=afpo voxels " << leaner << "/3";
  if (leaner < 2) {
    warn = "voxel-minimality expectation unmet (" + std::to_string(leaner) +
           "/3 seeds); deviation noted, report still produced";
  }

  // Comparison table over a shared 50-scenario robustness set: fittest
  // morphology per algorithm, mean displacement and fitness.
  std::vector<ControllerScenario> scenarios;
  for (int id = 0; id < 50; ++id) scenarios.push_back(ControllerScenario{777, id});
  for (const std::string& algorithm : algorithms) {
    const ScaledRun* best = &runs[algorithm].front();
    for (const ScaledRun& run : runs[algorithm]) {
      if (run.result.best_fitness > best->result.best_fitness) best = &run;
    }
    const Morphology m = decode_genome(best->result.best_genome, best->config);
    const std::vector<FitnessValue> values =
        evaluate_batch(m, scenarios, best->config.sim, best->config.fitness,
                       local_batch_evaluator());
    const std::vector<SimulationResult> results =
        local_batch_evaluator()(m, scenarios, best->config.sim);
    double displacement_sum = 0.0;
    double fitness_sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      displacement_sum += results[i].displacement;
      fitness_sum += values[i].value;
    }
    std::cout << "  table: algorithm=" << algorithm << " voxels=" << voxel_count(m)
              << " mean_displacement=" << format_double(displacement_sum / 50.0)
              << " mean_fitness=" << format_double(fitness_sum / 50.0) << std::endl;
  }

  detail = s.str();
  return hard_ok;
}

void report(int number, const std::string& name, bool ok, const std::string& detail,
            const std::string& warn = "") {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << name;
  if (!detail.empty()) std::cout << " — " << detail;
  if (!warn.empty()) std::cout << " [WARN: " << warn << "]";
  std::cout << std::endl;
}

}  // namespace

int main() {
  int passed = 0;
  const Clock::time_point start = Clock::now();

  struct Entry {
    int number;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Entry> fast{
      {1, "fitness arithmetic", criterion_fitness},
      {2, "rank statistics vs permutation oracle", criterion_statistics},
      {3, "scenario consistency", criterion_scenarios},
      {4, "simulator sanity", criterion_simulator},
      {5, "local/remote evaluation equivalence", criterion_protocol},
      {7, "genetic operator properties", criterion_operators},
      {8, "decode oracle", criterion_decode},
  };

  for (const Entry& entry : fast) {
    std::string detail;
    bool ok = false;
    try {
      ok = entry.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report(entry.number, entry.name, ok, detail);
    if (ok) passed += 1;
  }

  {
    std::string detail;
    std::string warn;
    bool ok = false;
    try {
      ok = criterion_evolution(detail, warn);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    report(6, "scaled evolution reproduction", ok, detail, warn);
    if (ok) passed += 1;
  }

  std::cout << "acceptance: " << passed << " of 8 criteria passed ("
            << static_cast<int>(seconds_since(start)) << " s)" << std::endl;
  return passed == 8 ? 0 : 1;
}
