// Command-line front end: evolve | serve | robustness | analyze | scenarios.
#include <array>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "evovox/eval_client.hpp"
#include "evovox/eval_server.hpp"
#include "evovox/evolution.hpp"
#include "evovox/run_config.hpp"
#include "evovox/stats.hpp"
#include "evovox/util.hpp"

namespace fs = std::filesystem;
using namespace evovox;

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

std::string resolve_output_dir(const std::string& flag, const std::string& config_dir) {
  if (!flag.empty()) return flag;
  if (!config_dir.empty()) return config_dir;
  if (const char* env = std::getenv("OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ".";
}

int cmd_evolve(const std::string& config_path, const std::string& out_flag, bool dry_run) {
  RunConfig config;
  try {
    config = load_run_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const std::string out_dir = resolve_output_dir(out_flag, config.output_dir);
  const std::size_t evaluations =
      static_cast<std::size_t>(config.params.population_size) *
      static_cast<std::size_t>(config.params.generations + 1) *
      static_cast<std::size_t>(config.training_scenarios);

  if (dry_run) {
    std::cout << "plan:\n"
              << "  algorithm            " << config.algorithm << "\n"
              << "  seed                 " << config.seed << "\n"
              << "  population           " << config.params.population_size << "\n"
              << "  generations          " << config.params.generations << "\n"
              << "  lattice              " << config.lattice.nx << "x" << config.lattice.ny
              << "x" << config.lattice.nz << "\n"
              << "  training scenarios   " << config.training_scenarios << "\n"
              << "  evaluations (max)    " << evaluations << "\n"
              << "  evaluation backend   "
              << (config.is_local() ? std::string("local")
                                    : std::to_string(config.pool.endpoints.size()) +
                                          " remote endpoint(s)")
              << "\n"
              << "  checkpoint interval  " << config.checkpoint_interval << "\n"
              << "  output dir           " << out_dir << "\n";
    return 0;
  }

  fs::create_directories(out_dir);

  LocalEvaluator local;
  RemoteEvaluator remote(config.pool);
  RequestEvaluator& backend =
      config.is_local() ? static_cast<RequestEvaluator&>(local) : remote;
  GenomeFitnessPipeline pipeline(config, backend);

  EvolveOptions options;
  options.params = config.params;
  options.input_count = config.cppn_inputs();
  options.output_count = config.cppn_outputs();
  options.checkpoint_interval = config.checkpoint_interval;
  std::string last_checkpoint;
  options.checkpoint_sink = [&](const nlohmann::json& j, int generation) {
    fs::path path = fs::path(out_dir) / ("checkpoint-gen" + std::to_string(generation) + ".json");
    write_text_file(path, canonical_json(j, 2) + "\n");
    last_checkpoint = path.string();
  };
  options.on_generation = [](const GenerationStats& s) {
    std::cout << "gen " << s.generation << " best " << format_double(s.best_fitness)
              << " mean " << format_double(s.mean_fitness) << " groups " << s.group_count
              << "\n";
  };

  InnovationRegistry registry;
  RandomSource rng(derive_seed(config.seed, kStreamEvolution));
  EvolveResult result;
  try {
    result = config.algorithm == "afpo"
                 ? evolve_afpo(options, std::ref(pipeline), registry, rng)
                 : evolve_neat(options, std::ref(pipeline), registry, rng);
  } catch (const EvaluationAborted& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!last_checkpoint.empty()) std::cerr << "last checkpoint: " << last_checkpoint << "\n";
    return 3;
  }

  write_text_file(fs::path(out_dir) / "record.csv", evolution_record_csv(result.record));
  write_text_file(fs::path(out_dir) / "run_config.json",
                  canonical_json(run_config_to_json(config), 2) + "\n");
  write_text_file(fs::path(out_dir) / "best_genome.json",
                  canonical_json(genome_to_json(result.best_genome), 2) + "\n");

  const Morphology best = decode_genome(result.best_genome, config);
  nlohmann::json morph = morphology_to_json(best);
  morph["voxel_count"] = voxel_count(best);
  morph["fitness"] = result.best_fitness;
  morph["algorithm"] = config.algorithm;
  morph["seed"] = config.seed;
  write_text_file(fs::path(out_dir) / "best_morphology.json", canonical_json(morph, 2) + "\n");

  std::cout << "done: best fitness " << format_double(result.best_fitness) << ", "
            << voxel_count(best) << " voxels, artifacts in " << out_dir << "\n";
  return 0;
}

int cmd_serve(const std::string& bind, int port, int workers) {
  EvalServerConfig config;
  config.bind_address = bind;
  config.port = port;
  config.worker_count =
      workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  if (config.worker_count < 1) config.worker_count = 1;

  EvalServer server(std::move(config));
  try {
    server.start();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::signal(SIGTERM, handle_signal);
  std::signal(SIGINT, handle_signal);
  std::cout << "listening on " << server.base_url() << " workers " << config.worker_count
            << std::endl;
  while (!g_stop.load() && server.running()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  std::cout << "draining" << std::endl;
  server.stop();
  return 0;
}

int cmd_robustness(const std::vector<std::string>& files, int scenario_count,
                   std::uint64_t master_seed, const std::string& out_flag,
                   double delta_max, bool dump_offsets) {
  if (scenario_count < 1) {
    std::cerr << "error: --scenarios must be >= 1\n";
    return 2;
  }
  const std::string out_dir = resolve_output_dir(out_flag, "");
  fs::create_directories(out_dir);
  LocalEvaluator evaluator;
  SimConfig sim;

  int failures = 0;
  for (const std::string& file : files) {
    Morphology m;
    try {
      m = morphology_from_json(nlohmann::json::parse(read_text_file(file)));
    } catch (const std::exception& e) {
      std::cerr << "error: " << file << ": " << e.what() << "\n";
      failures += 1;
      continue;
    }
    FitnessConfig fitness;
    fitness.delta_max = delta_max;
    fitness.upsilon_max = m.dims.volume();

    const std::string stem = fs::path(file).stem().string();
    std::vector<ControllerScenario> scenarios;
    std::vector<EvaluationRequest> requests;
    for (int id = 0; id < scenario_count; ++id) {
      ControllerScenario scenario{master_seed, id};
      scenarios.push_back(scenario);
      EvaluationRequest request;
      request.request_id = stem + "-" + std::to_string(id);
      request.morphology = m;
      request.scenario = scenario;
      request.sim_config = sim;
      request.fitness_config = fitness;
      requests.push_back(std::move(request));
    }
    const std::vector<EvaluationResponse> responses = evaluator.evaluate_all(requests);

    std::vector<SimulationResult> results(responses.size());
    std::vector<FitnessValue> values(responses.size());
    for (std::size_t i = 0; i < responses.size(); ++i) {
      results[i].displacement = responses[i].displacement;
      results[i].voxel_count = responses[i].voxel_count;
      results[i].status = sim_status_from_name(responses[i].status);
      values[i].value = responses[i].fitness;
      values[i].delta_score = responses[i].delta_score;
      values[i].nu_score = responses[i].nu_score;
    }
    write_text_file(fs::path(out_dir) / (stem + "_robustness.csv"),
                    robustness_csv(scenarios, results, values));

    if (dump_offsets) {
      for (int z = 0; z < m.dims.nz; ++z)
        for (int y = 0; y < m.dims.ny; ++y)
          for (int x = 0; x < m.dims.nx; ++x) {
            if (m.at(x, y, z) == VoxelState::kEmpty) continue;
            for (const ControllerScenario& s : scenarios) {
              std::cout << stem << "," << s.scenario_id << "," << x << "," << y << "," << z
                        << "," << format_double(phase_offset(s, x, y, z, m.dims)) << "\n";
            }
          }
    }
  }
  if (failures > 0) {
    std::cerr << failures << " of " << files.size() << " morphologies failed\n";
    return 1;
  }
  return 0;
}

int cmd_analyze(const std::vector<std::string>& files, const std::string& metric,
                const std::string& labels_flag, const std::string& out_flag, double alpha) {
  if (metric != "displacement" && metric != "fitness") {
    std::cerr << "error: --metric must be displacement or fitness\n";
    return 2;
  }
  std::vector<std::string> labels;
  if (!labels_flag.empty()) {
    std::stringstream ss(labels_flag);
    std::string item;
    while (std::getline(ss, item, ',')) labels.push_back(item);
    if (labels.size() != files.size()) {
      std::cerr << "error: --labels needs one label per file\n";
      return 2;
    }
  } else {
    for (const std::string& f : files) {
      std::string stem = fs::path(f).stem().string();
      const std::string suffix = "_robustness";
      if (stem.size() > suffix.size() &&
          stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
        stem.resize(stem.size() - suffix.size());
      }
      labels.push_back(stem);
    }
  }

  // Parse the robustness CSVs; key rows by scenario id so groups can be
  // intersected when files disagree on scenario counts.
  std::vector<std::map<std::string, std::vector<std::string>>> tables;
  for (const std::string& file : files) {
    std::vector<std::vector<std::string>> rows;
    try {
      rows = parse_csv(read_text_file(file));
    } catch (const std::exception& e) {
      std::cerr << "error: " << file << ": " << e.what() << "\n";
      return 2;
    }
    if (rows.empty() || rows[0].empty() || rows[0][0] != "scenario_id") {
      std::cerr << "error: " << file << ": not a robustness CSV\n";
      return 2;
    }
    std::map<std::string, std::vector<std::string>> table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size()) {
        std::cerr << "error: " << file << ": ragged row " << r << "\n";
        return 2;
      }
      table[rows[r][0]] = rows[r];
    }
    tables.push_back(std::move(table));
  }

  std::vector<std::string> shared_ids;
  for (const auto& [id, row] : tables[0]) {
    (void)row;
    bool everywhere = true;
    for (const auto& table : tables) {
      if (table.find(id) == table.end()) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) shared_ids.push_back(id);
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (tables[i].size() != shared_ids.size()) {
      std::cerr << "warning: " << files[i] << " has " << tables[i].size()
                << " scenarios; analyzing the " << shared_ids.size() << " shared ones\n";
    }
  }
  if (shared_ids.empty()) {
    std::cerr << "error: no shared scenario ids across inputs\n";
    return 2;
  }

  const std::size_t metric_col = metric == "displacement" ? 1 : 5;
  std::vector<SampleGroup> groups;
  std::cout << "group, Number of voxels, Mean displacement, Fitness value\n";
  for (std::size_t i = 0; i < tables.size(); ++i) {
    SampleGroup group;
    group.label = labels[i];
    double displacement_sum = 0.0;
    double fitness_sum = 0.0;
    std::string voxels;
    for (const std::string& id : shared_ids) {
      const std::vector<std::string>& row = tables[i].at(id);
      group.values.push_back(std::stod(row[metric_col]));
      displacement_sum += std::stod(row[1]);
      fitness_sum += std::stod(row[5]);
      voxels = row[2];
    }
    const double n = static_cast<double>(shared_ids.size());
    std::cout << group.label << ", " << voxels << ", "
              << format_double(displacement_sum / n) << ", "
              << format_double(fitness_sum / n) << "\n";
    groups.push_back(std::move(group));
  }

  const TestReport report = analyze_groups(groups, alpha);
  if (report.kruskal_wallis.has_value()) {
    std::cout << "kruskal-wallis H " << format_double(report.kruskal_wallis->H) << " df "
              << report.kruskal_wallis->df << " p "
              << format_double(report.kruskal_wallis->p_value) << "\n";
  } else {
    std::cout << "kruskal-wallis undefined (needs >= 2 groups)\n";
  }
  std::cout << "ranking (" << metric << "): " << ranking_text(report.ranking) << "\n";

  const std::string out_dir = resolve_output_dir(out_flag, "");
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "analysis_report.json",
                  canonical_json(test_report_to_json(report), 2) + "\n");
  for (const SampleGroup& group : groups) {
    const KdeCurve curve = kde(group.values);
    std::string csv = "x,density\n";
    for (const auto& [x, density] : curve.points) {
      csv += csv_row({format_double(x), format_double(density)});
    }
    write_text_file(fs::path(out_dir) / ("kde_" + group.label + ".csv"), csv);
  }
  return 0;
}

int cmd_scenarios(std::uint64_t master_seed, int scenario_id, const std::string& dims_text) {
  LatticeDims dims;
  if (std::sscanf(dims_text.c_str(), "%d,%d,%d", &dims.nx, &dims.ny, &dims.nz) != 3) {
    std::cerr << "error: --dims expects nx,ny,nz\n";
    return 2;
  }
  try {
    dims.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  ControllerScenario scenario{master_seed, scenario_id};
  std::cout << "x,y,z,phase\n";
  for (int z = 0; z < dims.nz; ++z)
    for (int y = 0; y < dims.ny; ++y)
      for (int x = 0; x < dims.nx; ++x) {
        std::cout << x << "," << y << "," << z << ","
                  << format_double(phase_offset(scenario, x, y, z, dims)) << "\n";
      }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxel soft-actuator neuroevolution toolkit"};
  app.require_subcommand(1);

  auto* evolve = app.add_subcommand("evolve", "run an evolution experiment from a config file");
  std::string config_path, out_dir;
  bool dry_run = false;
  evolve->add_option("--config", config_path, "run config JSON")->required();
  evolve->add_option("--out", out_dir, "output directory (overrides config and OUTPUT_DIR)");
  evolve->add_flag("--dry-run", dry_run, "validate config and print the plan, write nothing");

  auto* serve = app.add_subcommand("serve", "run the HTTP evaluation server");
  std::string bind = "127.0.0.1";
  int port = 8080;
  int workers = 0;
  serve->add_option("--bind", bind, "bind address");
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--workers", workers, "concurrent simulations (0 = hardware)");

  auto* robustness =
      app.add_subcommand("robustness", "evaluate morphologies over a shared scenario set");
  std::vector<std::string> morphology_files;
  int scenario_count = 500;
  std::uint64_t master_seed = 0;
  double delta_max = 20.0;
  bool dump_offsets = false;
  std::string rob_out;
  robustness->add_option("files", morphology_files, "morphology JSON files")->required();
  robustness->add_option("--scenarios", scenario_count, "number of scenarios");
  robustness->add_option("--master-seed", master_seed, "shared scenario master seed");
  robustness->add_option("--delta-max", delta_max, "displacement normalizer");
  robustness->add_option("--out", rob_out, "output directory");
  robustness->add_flag("--dump-offsets", dump_offsets,
                       "print morph,scenario,x,y,z,phase rows for occupied voxels");

  auto* analyze = app.add_subcommand("analyze", "compare robustness CSVs across groups");
  std::vector<std::string> csv_files;
  std::string metric = "displacement";
  std::string labels;
  std::string analyze_out;
  double alpha = 0.01;
  analyze->add_option("files", csv_files, "robustness CSV files")->required();
  analyze->add_option("--metric", metric, "displacement or fitness");
  analyze->add_option("--labels", labels, "comma-separated group labels");
  analyze->add_option("--alpha", alpha, "significance level for the ranking");
  analyze->add_option("--out", analyze_out, "output directory");

  auto* scenarios = app.add_subcommand("scenarios", "print a scenario's phase-offset table");
  std::uint64_t sc_seed = 0;
  int sc_id = 0;
  std::string sc_dims = "8,8,7";
  scenarios->add_option("--master-seed", sc_seed, "scenario master seed");
  scenarios->add_option("--scenario", sc_id, "scenario id");
  scenarios->add_option("--dims", sc_dims, "lattice dims nx,ny,nz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(evolve)) return cmd_evolve(config_path, out_dir, dry_run);
    if (app.got_subcommand(serve)) return cmd_serve(bind, port, workers);
    if (app.got_subcommand(robustness)) {
      return cmd_robustness(morphology_files, scenario_count, master_seed, rob_out, delta_max,
                            dump_offsets);
    }
    if (app.got_subcommand(analyze)) {
      return cmd_analyze(csv_files, metric, labels, analyze_out, alpha);
    }
    if (app.got_subcommand(scenarios)) return cmd_scenarios(sc_seed, sc_id, sc_dims);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
