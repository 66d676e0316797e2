// Python bindings for the core operations: morphology decode, simulation,
// fitness, scenario phases, genome operators, rank statistics, and whole
// evolution runs driven by the same JSON config the CLI accepts.
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "evovox/eval_client.hpp"
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

namespace py = pybind11;
using namespace evovox;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  using value_t = nlohmann::json::value_t;
  switch (j.type()) {
    case value_t::boolean:
      return py::bool_(j.get<bool>());
    case value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case value_t::number_float:
      return py::float_(j.get<double>());
    case value_t::string:
      return py::str(j.get<std::string>());
    case value_t::array: {
      py::list out;
      for (const nlohmann::json& item : j) out.append(json_to_py(item));
      return out;
    }
    case value_t::object: {
      py::dict out;
      for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
      return out;
    }
    default:
      return py::none();
  }
}

using LabeledGroups = std::vector<std::pair<std::string, std::vector<double>>>;

std::vector<SampleGroup> to_groups(const LabeledGroups& in) {
  std::vector<SampleGroup> groups;
  groups.reserve(in.size());
  for (const auto& [label, values] : in) groups.push_back(SampleGroup{label, values});
  return groups;
}

void check_coord(const Morphology& m, int x, int y, int z) {
  if (x < 0 || x >= m.dims.nx || y < 0 || y >= m.dims.ny || z < 0 || z >= m.dims.nz)
    throw std::out_of_range("voxel coordinate outside the lattice");
}

py::object run_evolution(const std::string& config_json) {
  RunConfig config = run_config_from_json(nlohmann::json::parse(config_json));
  config.validate();
  nlohmann::json out;
  {
    py::gil_scoped_release release;
    std::unique_ptr<RequestEvaluator> backend;
    if (config.is_local()) {
      backend = std::make_unique<LocalEvaluator>(0);
    } else {
      backend = std::make_unique<RemoteEvaluator>(config.pool);
    }
    GenomeFitnessPipeline pipeline(config, *backend);

    EvolveOptions options;
    options.params = config.params;
    options.input_count = config.cppn_inputs();
    options.output_count = config.cppn_outputs();
    options.checkpoint_interval = 0;

    InnovationRegistry registry;
    RandomSource rng(derive_seed(config.seed, kStreamEvolution));
    const EvolveResult result =
        config.algorithm == "afpo" ? evolve_afpo(options, std::ref(pipeline), registry, rng)
                                   : evolve_neat(options, std::ref(pipeline), registry, rng);

    const Morphology best = decode_genome(result.best_genome, config);
    out["algorithm"] = config.algorithm;
    out["seed"] = config.seed;
    out["best_fitness"] = result.best_fitness;
    out["best_genome"] = genome_to_json(result.best_genome);
    nlohmann::json morph = morphology_to_json(best);
    morph["voxel_count"] = voxel_count(best);
    out["best_morphology"] = morph;
    out["record"] = nlohmann::json::array();
    for (const GenerationStats& g : result.record.generations) {
      out["record"].push_back({{"generation", g.generation},
                               {"best_fitness", g.best_fitness},
                               {"mean_fitness", g.mean_fitness},
                               {"group_count", g.group_count}});
    }
  }
  return json_to_py(out);
}

py::object robustness_sweep(const Morphology& m, std::uint64_t master_seed, int scenario_count,
                            const SimConfig& sim, const FitnessConfig& fitness) {
  if (scenario_count < 1) throw std::invalid_argument("scenario_count must be >= 1");
  nlohmann::json rows = nlohmann::json::array();
  {
    py::gil_scoped_release release;
    std::vector<ControllerScenario> scenarios;
    for (int id = 0; id < scenario_count; ++id)
      scenarios.push_back(ControllerScenario{master_seed, id});
    const std::vector<SimulationResult> results = local_batch_evaluator()(m, scenarios, sim);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const FitnessValue value = combined_fitness(results[i], fitness);
      rows.push_back({{"scenario_id", scenarios[i].scenario_id},
                      {"displacement", results[i].displacement},
                      {"voxel_count", results[i].voxel_count},
                      {"status", sim_status_name(results[i].status)},
                      {"delta_score", value.delta_score},
                      {"nu_score", value.nu_score},
                      {"fitness", value.value}});
    }
  }
  return json_to_py(rows);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Voxel soft-robot neuroevolution: simulation, fitness, operators, statistics";
  m.attr("__version__") = "0.1.0";

  // --- lattice & morphology -------------------------------------------------
  py::enum_<VoxelState>(m, "VoxelState")
      .value("EMPTY", VoxelState::kEmpty)
      .value("PASSIVE", VoxelState::kPassive)
      .value("ACTIVE", VoxelState::kActive);

  py::class_<LatticeDims>(m, "LatticeDims")
      .def(py::init<int, int, int>(), py::arg("nx") = 8, py::arg("ny") = 8, py::arg("nz") = 7)
      .def_readwrite("nx", &LatticeDims::nx)
      .def_readwrite("ny", &LatticeDims::ny)
      .def_readwrite("nz", &LatticeDims::nz)
      .def("volume", &LatticeDims::volume)
      .def("__eq__", [](const LatticeDims& a, const LatticeDims& b) { return a == b; })
      .def("__repr__", [](const LatticeDims& d) {
        return "LatticeDims(" + std::to_string(d.nx) + ", " + std::to_string(d.ny) + ", " +
               std::to_string(d.nz) + ")";
      });

  py::class_<Morphology>(m, "Morphology")
      .def_readonly("dims", &Morphology::dims)
      .def_readonly("provenance", &Morphology::provenance)
      .def("get",
           [](const Morphology& m_, int x, int y, int z) {
             check_coord(m_, x, y, z);
             return m_.at(x, y, z);
           })
      .def("set",
           [](Morphology& m_, int x, int y, int z, VoxelState state) {
             check_coord(m_, x, y, z);
             m_.at(x, y, z) = state;
           })
      .def("rle", [](const Morphology& m_) { return morphology_to_rle(m_); })
      .def("to_json", [](const Morphology& m_) { return canonical_json(morphology_to_json(m_)); })
      .def_static("from_json",
                  [](const std::string& text) {
                    return morphology_from_json(nlohmann::json::parse(text));
                  })
      .def("__repr__", [](const Morphology& m_) {
        return "Morphology(" + std::to_string(m_.dims.nx) + "x" + std::to_string(m_.dims.ny) +
               "x" + std::to_string(m_.dims.nz) + ", " + std::to_string(voxel_count(m_)) +
               " voxels)";
      });

  m.def("make_empty_morphology", &make_empty_morphology, py::arg("dims"));
  m.def("voxel_count", &voxel_count, py::arg("morphology"));
  m.def("largest_component", &largest_component, py::arg("morphology"));
  m.def("normalize_coord", &normalize_coord, py::arg("i"), py::arg("n"));

  // --- controller scenarios -------------------------------------------------
  py::class_<ControllerScenario>(m, "ControllerScenario")
      .def(py::init([](std::uint64_t master_seed, int scenario_id) {
             return ControllerScenario{master_seed, scenario_id};
           }),
           py::arg("master_seed") = 0, py::arg("scenario_id") = 0)
      .def_readwrite("master_seed", &ControllerScenario::master_seed)
      .def_readwrite("scenario_id", &ControllerScenario::scenario_id);

  m.def("phase_offset", &phase_offset, py::arg("scenario"), py::arg("x"), py::arg("y"),
        py::arg("z"), py::arg("dims"));

  // --- simulator ------------------------------------------------------------
  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("voxel_edge", &SimConfig::voxel_edge)
      .def_readwrite("voxel_mass", &SimConfig::voxel_mass)
      .def_readwrite("spring_stiffness", &SimConfig::spring_stiffness)
      .def_readwrite("shear_stiffness", &SimConfig::shear_stiffness)
      .def_readwrite("damping_ratio", &SimConfig::damping_ratio)
      .def_readwrite("gravity", &SimConfig::gravity)
      .def_readwrite("ground_stiffness", &SimConfig::ground_stiffness)
      .def_readwrite("friction_coefficient", &SimConfig::friction_coefficient)
      .def_readwrite("actuation_amplitude", &SimConfig::actuation_amplitude)
      .def_readwrite("actuation_frequency", &SimConfig::actuation_frequency)
      .def_readwrite("settle_duration", &SimConfig::settle_duration)
      .def_readwrite("run_duration", &SimConfig::run_duration)
      .def_readwrite("timestep", &SimConfig::timestep)
      .def_readwrite("enable_ground", &SimConfig::enable_ground)
      .def_readwrite("enable_actuation", &SimConfig::enable_actuation)
      .def_readwrite("planar_displacement", &SimConfig::planar_displacement)
      .def("stability_limit", &SimConfig::stability_limit)
      .def("validate", &SimConfig::validate);

  py::class_<SimulationResult>(m, "SimulationResult")
      .def_readonly("displacement", &SimulationResult::displacement)
      .def_readonly("voxel_count", &SimulationResult::voxel_count)
      .def_property_readonly("status",
                             [](const SimulationResult& r) { return sim_status_name(r.status); })
      .def_property_readonly("settled_com",
                             [](const SimulationResult& r) {
                               return py::make_tuple(r.settled_com.x, r.settled_com.y,
                                                     r.settled_com.z);
                             })
      .def_property_readonly("final_com", [](const SimulationResult& r) {
        return py::make_tuple(r.final_com.x, r.final_com.y, r.final_com.z);
      });

  m.def(
      "simulate",
      [](const Morphology& m_, const ControllerScenario& scenario, const SimConfig& cfg) {
        py::gil_scoped_release release;
        return simulate(m_, scenario, cfg);
      },
      py::arg("morphology"), py::arg("scenario"), py::arg("config"));

  // --- fitness ----------------------------------------------------------------
  py::class_<FitnessConfig>(m, "FitnessConfig")
      .def(py::init<>())
      .def_readwrite("delta_max", &FitnessConfig::delta_max)
      .def_readwrite("upsilon_max", &FitnessConfig::upsilon_max)
      .def_readwrite("clamp_delta", &FitnessConfig::clamp_delta)
      .def_property(
          "mode",
          [](const FitnessConfig& cfg) {
            return cfg.mode == FitnessConfig::Mode::kCombined ? "combined" : "displacement_only";
          },
          [](FitnessConfig& cfg, const std::string& mode) {
            if (mode == "combined") {
              cfg.mode = FitnessConfig::Mode::kCombined;
            } else if (mode == "displacement_only") {
              cfg.mode = FitnessConfig::Mode::kDisplacementOnly;
            } else {
              throw std::invalid_argument("mode must be 'combined' or 'displacement_only'");
            }
          });

  py::class_<FitnessValue>(m, "FitnessValue")
      .def_readonly("value", &FitnessValue::value)
      .def_readonly("delta_score", &FitnessValue::delta_score)
      .def_readonly("nu_score", &FitnessValue::nu_score);

  m.def("displacement_score", &displacement_score, py::arg("displacement"), py::arg("config"));
  m.def("volume_score", &volume_score, py::arg("count"), py::arg("config"));
  m.def("combined_fitness", &combined_fitness, py::arg("result"), py::arg("config"));
  m.def("robustness_sweep", &robustness_sweep, py::arg("morphology"), py::arg("master_seed"),
        py::arg("scenario_count"), py::arg("sim"), py::arg("fitness"));

  // --- rng --------------------------------------------------------------------
  py::class_<RandomSource>(m, "RandomSource")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &RandomSource::next_u64)
      .def("uniform", [](RandomSource& rng) { return rng.uniform(); })
      .def("uniform",
           [](RandomSource& rng, double lo, double hi) { return rng.uniform(lo, hi); },
           py::arg("lo"), py::arg("hi"))
      .def("uniform_index", &RandomSource::uniform_index, py::arg("n"))
      .def("chance", &RandomSource::chance, py::arg("p"))
      .def("gaussian", &RandomSource::gaussian, py::arg("mean"), py::arg("sigma"))
      .def("derive", &RandomSource::derive, py::arg("stream"))
      .def("seed", &RandomSource::seed);

  m.def("derive_seed", &derive_seed, py::arg("seed"), py::arg("stream"));

  // --- genomes & operators -----------------------------------------------------
  py::class_<NeatParams>(m, "NeatParams")
      .def(py::init<>())
      .def_readwrite("compatibility_threshold", &NeatParams::compatibility_threshold)
      .def_readwrite("disjoint_coefficient", &NeatParams::disjoint_coefficient)
      .def_readwrite("weight_coefficient", &NeatParams::weight_coefficient)
      .def_readwrite("max_stagnation", &NeatParams::max_stagnation)
      .def_readwrite("survival_threshold", &NeatParams::survival_threshold)
      .def_readwrite("activation_mutate_rate", &NeatParams::activation_mutate_rate)
      .def_readwrite("add_connection_rate", &NeatParams::add_connection_rate)
      .def_readwrite("delete_connection_rate", &NeatParams::delete_connection_rate)
      .def_readwrite("toggle_connection_rate", &NeatParams::toggle_connection_rate)
      .def_readwrite("add_node_rate", &NeatParams::add_node_rate)
      .def_readwrite("delete_node_rate", &NeatParams::delete_node_rate)
      .def_readwrite("weight_mutate_rate", &NeatParams::weight_mutate_rate)
      .def_readwrite("weight_perturb_sigma", &NeatParams::weight_perturb_sigma)
      .def_readwrite("weight_replace_rate", &NeatParams::weight_replace_rate)
      .def_readwrite("population_size", &NeatParams::population_size)
      .def_readwrite("generations", &NeatParams::generations)
      .def("validate", &NeatParams::validate);

  py::class_<InnovationRegistry>(m, "InnovationRegistry")
      .def(py::init<>())
      .def("begin_generation", &InnovationRegistry::begin_generation);

  py::class_<CppnGenome>(m, "CppnGenome")
      .def_readonly("serial", &CppnGenome::serial)
      .def_readonly("input_count", &CppnGenome::input_count)
      .def_readonly("output_count", &CppnGenome::output_count)
      .def("hidden_count", &CppnGenome::hidden_count)
      .def("gene_count", &CppnGenome::gene_count)
      .def("to_json", [](const CppnGenome& g) { return canonical_json(genome_to_json(g)); })
      .def_static("from_json", [](const std::string& text) {
        return genome_from_json(nlohmann::json::parse(text));
      });

  m.def("make_initial_genome", &make_initial_genome, py::arg("input_count"),
        py::arg("output_count"), py::arg("registry"), py::arg("rng"));
  m.def(
      "mutate",
      [](const CppnGenome& genome, const NeatParams& params, InnovationRegistry& registry,
         RandomSource& rng) { return mutate(genome, params, registry, rng); },
      py::arg("genome"), py::arg("params"), py::arg("registry"), py::arg("rng"));
  m.def("crossover", &crossover, py::arg("fitter"), py::arg("other"), py::arg("registry"),
        py::arg("rng"));
  m.def("distance", &distance, py::arg("a"), py::arg("b"), py::arg("params"));
  m.def("is_feed_forward", &is_feed_forward, py::arg("genome"));
  m.def(
      "activate",
      [](const CppnGenome& genome, const std::vector<double>& inputs) {
        return activate(genome, inputs);
      },
      py::arg("genome"), py::arg("inputs"));
  m.def(
      "decode_cppn",
      [](const CppnGenome& genome, const LatticeDims& dims) {
        if (genome.input_count != 3 || genome.output_count != 2)
          throw std::invalid_argument("decode_cppn expects a 3-input, 2-output genome");
        return decode(
            [&genome](double x, double y, double z) {
              const std::vector<double> out =
                  activate(genome, std::array<double, 3>{x, y, z});
              return std::pair<double, double>(out[0], out[1]);
            },
            dims);
      },
      py::arg("genome"), py::arg("dims"));

  // --- statistics ----------------------------------------------------------------
  m.def(
      "kruskal_wallis",
      [](const LabeledGroups& groups) {
        const KruskalWallisResult r = kruskal_wallis(to_groups(groups));
        py::dict d;
        d["H"] = r.H;
        d["df"] = r.df;
        d["p_value"] = r.p_value;
        return d;
      },
      py::arg("groups"));
  m.def(
      "dunns_test",
      [](const LabeledGroups& groups, bool bonferroni) {
        py::list out;
        for (const PairwiseComparison& c :
             dunns_test(to_groups(groups),
                        bonferroni ? Adjustment::kBonferroni : Adjustment::kNone)) {
          py::dict d;
          d["label_i"] = c.label_i;
          d["label_j"] = c.label_j;
          d["z"] = c.z;
          d["p_raw"] = c.p_raw;
          d["p_adjusted"] = c.p_adjusted;
          out.append(d);
        }
        return out;
      },
      py::arg("groups"), py::arg("bonferroni") = true);
  m.def(
      "kde",
      [](const std::vector<double>& values, std::optional<double> bandwidth, int grid_points) {
        const KdeCurve curve = kde(values, bandwidth, grid_points);
        py::list points;
        for (const auto& [x, density] : curve.points) points.append(py::make_tuple(x, density));
        py::dict d;
        d["points"] = points;
        d["bandwidth"] = curve.bandwidth;
        d["degenerate"] = curve.degenerate;
        return d;
      },
      py::arg("values"), py::arg("bandwidth") = std::nullopt, py::arg("grid_points") = 256);
  m.def(
      "summarize",
      [](const std::vector<double>& values) {
        const GroupSummary s = summarize(values);
        py::dict d;
        d["min"] = s.min;
        d["max"] = s.max;
        d["median"] = s.median;
        d["mean"] = s.mean;
        d["sd"] = s.sd;
        return d;
      },
      py::arg("values"));
  m.def(
      "analyze_groups",
      [](const LabeledGroups& groups, double alpha) {
        return json_to_py(test_report_to_json(analyze_groups(to_groups(groups), alpha)));
      },
      py::arg("groups"), py::arg("alpha") = 0.01);
  m.def("chi_square_upper_tail", &chi_square_upper_tail, py::arg("statistic"), py::arg("df"));

  // --- evolution ---------------------------------------------------------------
  m.def("run_evolution", &run_evolution, py::arg("config_json"),
        "Run a full evolution described by a JSON config string (the same schema the CLI "
        "accepts) and return the record, best genome, and best morphology.");
}
