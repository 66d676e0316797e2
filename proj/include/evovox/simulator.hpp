#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "evovox/morphology.hpp"
#include "evovox/scenario.hpp"

namespace evovox {

struct SimConfig {
  double voxel_edge = 0.01;          // m
  double voxel_mass = 0.001;         // kg contributed to each corner node per adjacent voxel
  double spring_stiffness = 1000.0;  // N/m, structural edges
  double shear_stiffness = 500.0;    // N/m, face diagonals
  double damping_ratio = 0.3;
  double gravity = 9.81;             // m/s^2, downward
  double ground_stiffness = 5000.0;  // N/m penalty
  double friction_coefficient = 0.8;
  double actuation_amplitude = 0.2;  // fraction of rest length
  double actuation_frequency = 2.0;  // Hz
  double settle_duration = 1.0;      // s, actuation off
  double run_duration = 10.0;        // s, actuation on
  double timestep = 1e-4;            // s
  bool enable_ground = true;
  bool enable_actuation = true;
  bool planar_displacement = false;  // measure xy distance instead of 3D

  // Explicit-integration stability bound: (1/pi)*sqrt(min node mass / max stiffness).
  double stability_limit() const;
  void validate() const;
};

enum class SimStatus : std::uint8_t { kOk, kUnstable, kInvalidMorphology };

std::string sim_status_name(SimStatus status);
SimStatus sim_status_from_name(const std::string& name);

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

struct SimulationResult {
  double displacement = 0.0;  // voxel-edge lengths
  int voxel_count = 0;
  Vec3 settled_com;
  Vec3 final_com;
  SimStatus status = SimStatus::kOk;
};

// Mass-spring lattice in struct-of-arrays form. Node i sits at lattice corner
// (ix, iy, iz); x and y are centered on the lattice so the grid mirror
// x -> nx - x is an exact floating-point negation of positions.
struct MassSpringSystem {
  LatticeDims dims;
  int voxel_count = 0;

  // Nodes.
  std::vector<double> px, py, pz;
  std::vector<double> vx, vy, vz;
  std::vector<double> mass;
  std::vector<std::array<int, 3>> corner;  // lattice corner indices

  // Springs.
  std::vector<int> spring_a, spring_b;
  std::vector<double> rest_length;
  std::vector<double> stiffness;
  std::vector<double> damping;
  // Indices into active_phase for the active voxels each spring belongs to;
  // re-sorted by phase value when phases are assigned so summation order is a
  // function of values, not of construction order.
  std::vector<std::vector<int>> spring_actuators;

  // Active voxels (lattice coords, construction order) and their phases.
  std::vector<std::array<int, 3>> active_voxels;
  std::vector<double> active_phase;

  // Per-node force gather plan: groups of one or two incident springs, keyed
  // and ordered by the mirror-invariant offset (|dx|, dy, dz) of the other
  // endpoint; a +-dx pair is summed pairwise before entering the accumulator.
  struct GatherEntry {
    int spring = 0;
    double sign = 1.0;
    bool pair_with_next = false;
  };
  std::vector<GatherEntry> gather;
  std::vector<int> gather_start;  // size nodes+1

  bool unstable = false;

  std::size_t node_count() const { return px.size(); }
  std::size_t spring_count() const { return spring_a.size(); }
};

// Builds nodes, springs, and the gather plan. Throws on invalid config;
// empty morphology yields a system with zero nodes (callers route that to
// the invalid_morphology status).
MassSpringSystem build_lattice(const Morphology& m, const SimConfig& cfg);

// Assign per-active-voxel phases from a scenario, or directly (test hook /
// mirrored-field experiments); order follows active_voxels.
void assign_phases(MassSpringSystem& sys, const ControllerScenario& scenario);
void assign_phases(MassSpringSystem& sys, const std::vector<double>& phases);

// Advances `steps` timesteps. When `actuate` is set, spring rest lengths are
// modulated as L0*(1 + A * mean_v sin(2*pi*f*(t0 + i*dt) + phi_v)) over each
// spring's adjacent active voxels. Sets sys.unstable (and stops early) if a
// velocity norm exceeds 1e3 m/s or goes non-finite.
void advance(MassSpringSystem& sys, const SimConfig& cfg, int steps, bool actuate,
             double t0 = 0.0);

Vec3 com(const MassSpringSystem& sys);
double kinetic_energy(const MassSpringSystem& sys);
Vec3 momentum(const MassSpringSystem& sys);

// Settle then run per the config schedule; the actuation clock starts at the
// beginning of the run phase.
SimulationResult simulate(const Morphology& m, const ControllerScenario& scenario,
                          const SimConfig& cfg);

nlohmann::json sim_config_to_json(const SimConfig& cfg);
// Strict: unknown keys are rejected (wire requests must not silently drift).
SimConfig sim_config_from_json(const nlohmann::json& j);

}  // namespace evovox
