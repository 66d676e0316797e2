#include "evovox/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace evovox {

double SimConfig::stability_limit() const {
  const double k_max =
      std::max(std::max(spring_stiffness, shear_stiffness), ground_stiffness);
  constexpr double kInvPi = 0.31830988618379067154;
  return kInvPi * std::sqrt(voxel_mass / k_max);
}

void SimConfig::validate() const {
  if (!(voxel_edge > 0.0)) throw std::invalid_argument("SimConfig: voxel_edge must be > 0");
  if (!(voxel_mass > 0.0)) throw std::invalid_argument("SimConfig: voxel_mass must be > 0");
  if (!(spring_stiffness > 0.0) || !(shear_stiffness > 0.0) || !(ground_stiffness > 0.0))
    throw std::invalid_argument("SimConfig: stiffnesses must be > 0");
  if (!(damping_ratio > 0.0))
    throw std::invalid_argument("SimConfig: damping_ratio must be > 0");
  if (!(gravity >= 0.0)) throw std::invalid_argument("SimConfig: gravity must be >= 0");
  if (!(friction_coefficient >= 0.0))
    throw std::invalid_argument("SimConfig: friction_coefficient must be >= 0");
  if (!(actuation_amplitude > 0.0 && actuation_amplitude < 1.0))
    throw std::invalid_argument("SimConfig: actuation_amplitude must be in (0, 1)");
  if (!(actuation_frequency > 0.0))
    throw std::invalid_argument("SimConfig: actuation_frequency must be > 0");
  if (!(settle_duration >= 0.0) || !(run_duration >= 0.0))
    throw std::invalid_argument("SimConfig: durations must be >= 0");
  if (!(timestep > 0.0)) throw std::invalid_argument("SimConfig: timestep must be > 0");
  if (!(timestep < stability_limit()))
    throw std::invalid_argument(
        "SimConfig: timestep exceeds the explicit-integration stability bound "
        "(1/pi)*sqrt(voxel_mass/max_stiffness)");
}

std::string sim_status_name(SimStatus status) {
  switch (status) {
    case SimStatus::kOk: return "ok";
    case SimStatus::kUnstable: return "unstable";
    case SimStatus::kInvalidMorphology: return "invalid_morphology";
  }
  throw std::logic_error("sim_status_name: bad status");
}

SimStatus sim_status_from_name(const std::string& name) {
  if (name == "ok") return SimStatus::kOk;
  if (name == "unstable") return SimStatus::kUnstable;
  if (name == "invalid_morphology") return SimStatus::kInvalidMorphology;
  throw std::invalid_argument("unknown simulation status: " + name);
}

MassSpringSystem build_lattice(const Morphology& m, const SimConfig& cfg) {
  cfg.validate();
  MassSpringSystem sys;
  sys.dims = m.dims;
  sys.voxel_count = voxel_count(m);

  const int cx = m.dims.nx + 1, cy = m.dims.ny + 1, cz = m.dims.nz + 1;
  const auto corner_key = [&](int ix, int iy, int iz) {
    return ix + cx * (iy + cy * iz);
  };
  std::vector<int> node_of(static_cast<std::size_t>(cx * cy * cz), -1);

  // Centered x/y placement makes the lattice mirror an exact FP negation;
  // z starts at the ground plane.
  const double half_x = static_cast<double>(m.dims.nx) * 0.5;
  const double half_y = static_cast<double>(m.dims.ny) * 0.5;

  const auto node_index = [&](int ix, int iy, int iz) {
    int& slot = node_of[static_cast<std::size_t>(corner_key(ix, iy, iz))];
    if (slot < 0) {
      slot = static_cast<int>(sys.px.size());
      sys.px.push_back((static_cast<double>(ix) - half_x) * cfg.voxel_edge);
      sys.py.push_back((static_cast<double>(iy) - half_y) * cfg.voxel_edge);
      sys.pz.push_back(static_cast<double>(iz) * cfg.voxel_edge);
      sys.vx.push_back(0.0);
      sys.vy.push_back(0.0);
      sys.vz.push_back(0.0);
      sys.mass.push_back(0.0);
      sys.corner.push_back({ix, iy, iz});
    }
    return slot;
  };

  // Pass 1: nodes and masses (one voxel_mass share per adjacent voxel).
  for (int z = 0; z < m.dims.nz; ++z)
    for (int y = 0; y < m.dims.ny; ++y)
      for (int x = 0; x < m.dims.nx; ++x) {
        if (m.at(x, y, z) == VoxelState::kEmpty) continue;
        for (int dz = 0; dz <= 1; ++dz)
          for (int dy = 0; dy <= 1; ++dy)
            for (int dx = 0; dx <= 1; ++dx)
              sys.mass[static_cast<std::size_t>(node_index(x + dx, y + dy, z + dz))] +=
                  cfg.voxel_mass;
      }

  // Pass 2: springs. Cube corner pairs differing in one coordinate are
  // structural edges; pairs differing in two are face diagonals.
  std::map<std::pair<int, int>, int> spring_of;
  const double diag_rest = cfg.voxel_edge * std::sqrt(2.0);
  for (int z = 0; z < m.dims.nz; ++z)
    for (int y = 0; y < m.dims.ny; ++y)
      for (int x = 0; x < m.dims.nx; ++x) {
        const VoxelState state = m.at(x, y, z);
        if (state == VoxelState::kEmpty) continue;
        int active_index = -1;
        if (state == VoxelState::kActive) {
          active_index = static_cast<int>(sys.active_voxels.size());
          sys.active_voxels.push_back({x, y, z});
        }
        int corners[8];
        for (int c = 0; c < 8; ++c)
          corners[c] = node_index(x + (c & 1), y + ((c >> 1) & 1), z + ((c >> 2) & 1));
        for (int i = 0; i < 8; ++i)
          for (int j = i + 1; j < 8; ++j) {
            const int differ = __builtin_popcount(static_cast<unsigned>(i ^ j));
            if (differ > 2) continue;
            const int a = std::min(corners[i], corners[j]);
            const int b = std::max(corners[i], corners[j]);
            auto [it, inserted] = spring_of.try_emplace({a, b}, -1);
            if (inserted) {
              it->second = static_cast<int>(sys.spring_a.size());
              sys.spring_a.push_back(a);
              sys.spring_b.push_back(b);
              sys.rest_length.push_back(differ == 1 ? cfg.voxel_edge : diag_rest);
              sys.stiffness.push_back(differ == 1 ? cfg.spring_stiffness
                                                  : cfg.shear_stiffness);
              sys.damping.push_back(0.0);  // filled below once masses are final
              sys.spring_actuators.emplace_back();
            }
            if (active_index >= 0) {
              auto& list = sys.spring_actuators[static_cast<std::size_t>(it->second)];
              if (list.empty() || list.back() != active_index) list.push_back(active_index);
            }
          }
      }

  // Spring damping from the endpoint reduced mass: c = 2*zeta*sqrt(k*mu).
  for (std::size_t s = 0; s < sys.spring_count(); ++s) {
    const double ma = sys.mass[static_cast<std::size_t>(sys.spring_a[s])];
    const double mb = sys.mass[static_cast<std::size_t>(sys.spring_b[s])];
    const double mu = ma * mb / (ma + mb);
    sys.damping[s] = 2.0 * cfg.damping_ratio * std::sqrt(sys.stiffness[s] * mu);
  }

  // Gather plan: per node, incident springs ordered by the mirror-invariant
  // key (|dx|, dy, dz); the two members of a +-dx pair are summed together
  // before entering the accumulator, so a mirrored lattice accumulates the
  // exactly negated x-forces in the same order.
  struct Incident {
    int spring;
    double sign;
    int dx, dy, dz;
  };
  std::vector<std::vector<Incident>> incident(sys.node_count());
  for (std::size_t s = 0; s < sys.spring_count(); ++s) {
    const int a = sys.spring_a[s], b = sys.spring_b[s];
    const auto& ca = sys.corner[static_cast<std::size_t>(a)];
    const auto& cb = sys.corner[static_cast<std::size_t>(b)];
    incident[static_cast<std::size_t>(a)].push_back(
        {static_cast<int>(s), 1.0, cb[0] - ca[0], cb[1] - ca[1], cb[2] - ca[2]});
    incident[static_cast<std::size_t>(b)].push_back(
        {static_cast<int>(s), -1.0, ca[0] - cb[0], ca[1] - cb[1], ca[2] - cb[2]});
  }
  sys.gather_start.assign(sys.node_count() + 1, 0);
  for (std::size_t n = 0; n < sys.node_count(); ++n) {
    auto& list = incident[n];
    std::sort(list.begin(), list.end(), [](const Incident& l, const Incident& r) {
      const int lax = std::abs(l.dx), rax = std::abs(r.dx);
      if (lax != rax) return lax < rax;
      if (l.dy != r.dy) return l.dy < r.dy;
      if (l.dz != r.dz) return l.dz < r.dz;
      return l.dx < r.dx;
    });
    for (std::size_t i = 0; i < list.size(); ++i) {
      const bool paired = i + 1 < list.size() && std::abs(list[i].dx) == std::abs(list[i + 1].dx) &&
                          list[i].dy == list[i + 1].dy && list[i].dz == list[i + 1].dz;
      sys.gather.push_back({list[i].spring, list[i].sign, paired});
      if (paired) {
        sys.gather.push_back({list[i + 1].spring, list[i + 1].sign, false});
        ++i;
      }
    }
    sys.gather_start[n + 1] = static_cast<int>(sys.gather.size());
  }

  return sys;
}

void assign_phases(MassSpringSystem& sys, const ControllerScenario& scenario) {
  std::vector<double> phases(sys.active_voxels.size());
  for (std::size_t i = 0; i < sys.active_voxels.size(); ++i) {
    const auto& v = sys.active_voxels[i];
    phases[i] = phase_offset(scenario, v[0], v[1], v[2], sys.dims);
  }
  assign_phases(sys, phases);
}

void assign_phases(MassSpringSystem& sys, const std::vector<double>& phases) {
  if (phases.size() != sys.active_voxels.size())
    throw std::invalid_argument("assign_phases: one phase per active voxel required");
  sys.active_phase = phases;
  // Order each spring's actuator list by phase value so the actuation mean is
  // summed in a value-determined order (mirror lattices share the multiset).
  for (auto& list : sys.spring_actuators) {
    std::stable_sort(list.begin(), list.end(), [&](int l, int r) {
      return sys.active_phase[static_cast<std::size_t>(l)] <
             sys.active_phase[static_cast<std::size_t>(r)];
    });
  }
}

void advance(MassSpringSystem& sys, const SimConfig& cfg, int steps, bool actuate,
             double t0) {
  if (sys.unstable || steps <= 0) return;
  const bool actuating = actuate && cfg.enable_actuation && !sys.active_voxels.empty();
  if (actuating && sys.active_phase.size() != sys.active_voxels.size())
    throw std::logic_error("advance: phases not assigned");

  const std::size_t n_nodes = sys.node_count();
  const std::size_t n_springs = sys.spring_count();
  const double dt = cfg.timestep;
  const double omega = 2.0 * 3.141592653589793238462643383280 * cfg.actuation_frequency;

  std::vector<double> fx(n_springs), fy(n_springs), fz(n_springs);
  std::vector<double> sv(sys.active_voxels.size(), 0.0);
  std::vector<double> inv_mdt(n_nodes), grav(n_nodes), ground_damp(n_nodes);
  for (std::size_t n = 0; n < n_nodes; ++n) {
    inv_mdt[n] = dt / sys.mass[n];
    grav[n] = -sys.mass[n] * cfg.gravity;
    ground_damp[n] = 2.0 * cfg.damping_ratio * std::sqrt(cfg.ground_stiffness * sys.mass[n]);
  }

  for (int step = 0; step < steps; ++step) {
    if (actuating) {
      const double t = t0 + static_cast<double>(step) * dt;
      const double wt = omega * t;
      for (std::size_t v = 0; v < sv.size(); ++v) sv[v] = std::sin(wt + sys.active_phase[v]);
    }

    // Spring pass: one force vector per spring (acting on endpoint a; b gets
    // the negation via the gather sign).
    for (std::size_t s = 0; s < n_springs; ++s) {
      const std::size_t a = static_cast<std::size_t>(sys.spring_a[s]);
      const std::size_t b = static_cast<std::size_t>(sys.spring_b[s]);
      const double dx = sys.px[b] - sys.px[a];
      const double dy = sys.py[b] - sys.py[a];
      const double dz = sys.pz[b] - sys.pz[a];
      const double len2 = dx * dx + dy * dy + dz * dz;
      if (!(len2 > 1e-24)) {
        fx[s] = fy[s] = fz[s] = 0.0;
        continue;
      }
      const double len = std::sqrt(len2);
      double rest = sys.rest_length[s];
      if (actuating) {
        const auto& act = sys.spring_actuators[s];
        if (!act.empty()) {
          double sum = 0.0;
          for (int idx : act) sum += sv[static_cast<std::size_t>(idx)];
          rest *= 1.0 + cfg.actuation_amplitude * (sum / static_cast<double>(act.size()));
        }
      }
      const double rvx = sys.vx[b] - sys.vx[a];
      const double rvy = sys.vy[b] - sys.vy[a];
      const double rvz = sys.vz[b] - sys.vz[a];
      const double rate = (rvx * dx + rvy * dy + rvz * dz) / len;
      const double scale = (sys.stiffness[s] * (len - rest) + sys.damping[s] * rate) / len;
      fx[s] = scale * dx;
      fy[s] = scale * dy;
      fz[s] = scale * dz;
    }

    // Node pass: gravity, ground contact, spring gather, semi-implicit Euler.
    bool blew_up = false;
    for (std::size_t n = 0; n < n_nodes; ++n) {
      double ax = 0.0, ay = 0.0, az = grav[n];
      if (cfg.enable_ground && sys.pz[n] < 0.0) {
        const double normal = -cfg.ground_stiffness * sys.pz[n] - ground_damp[n] * sys.vz[n];
        if (normal > 0.0) {
          az += normal;
          const double vt2 = sys.vx[n] * sys.vx[n] + sys.vy[n] * sys.vy[n];
          if (vt2 > 0.0) {
            const double vt = std::sqrt(vt2);
            const double cap = sys.mass[n] * vt / dt;
            const double fric = std::min(cfg.friction_coefficient * normal, cap);
            ax -= fric * sys.vx[n] / vt;
            ay -= fric * sys.vy[n] / vt;
          }
        }
      }
      const int end = sys.gather_start[n + 1];
      for (int g = sys.gather_start[n]; g < end; ++g) {
        const auto& e = sys.gather[static_cast<std::size_t>(g)];
        if (e.pair_with_next) {
          const auto& e2 = sys.gather[static_cast<std::size_t>(g + 1)];
          const std::size_t s1 = static_cast<std::size_t>(e.spring);
          const std::size_t s2 = static_cast<std::size_t>(e2.spring);
          ax += e.sign * fx[s1] + e2.sign * fx[s2];
          ay += e.sign * fy[s1] + e2.sign * fy[s2];
          az += e.sign * fz[s1] + e2.sign * fz[s2];
          ++g;
        } else {
          const std::size_t s1 = static_cast<std::size_t>(e.spring);
          ax += e.sign * fx[s1];
          ay += e.sign * fy[s1];
          az += e.sign * fz[s1];
        }
      }
      sys.vx[n] += ax * inv_mdt[n];
      sys.vy[n] += ay * inv_mdt[n];
      sys.vz[n] += az * inv_mdt[n];
      sys.px[n] += sys.vx[n] * dt;
      sys.py[n] += sys.vy[n] * dt;
      sys.pz[n] += sys.vz[n] * dt;
      const double v2 = sys.vx[n] * sys.vx[n] + sys.vy[n] * sys.vy[n] + sys.vz[n] * sys.vz[n];
      if (!(v2 <= 1e6)) blew_up = true;
    }
    if (blew_up) {
      sys.unstable = true;
      return;
    }
  }
}

Vec3 com(const MassSpringSystem& sys) {
  double sx = 0.0, sy = 0.0, sz = 0.0, sm = 0.0;
  for (std::size_t n = 0; n < sys.node_count(); ++n) {
    sx += sys.mass[n] * sys.px[n];
    sy += sys.mass[n] * sys.py[n];
    sz += sys.mass[n] * sys.pz[n];
    sm += sys.mass[n];
  }
  if (sm <= 0.0) return {};
  return {sx / sm, sy / sm, sz / sm};
}

double kinetic_energy(const MassSpringSystem& sys) {
  double e = 0.0;
  for (std::size_t n = 0; n < sys.node_count(); ++n) {
    e += 0.5 * sys.mass[n] *
         (sys.vx[n] * sys.vx[n] + sys.vy[n] * sys.vy[n] + sys.vz[n] * sys.vz[n]);
  }
  return e;
}

Vec3 momentum(const MassSpringSystem& sys) {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  for (std::size_t n = 0; n < sys.node_count(); ++n) {
    sx += sys.mass[n] * sys.vx[n];
    sy += sys.mass[n] * sys.vy[n];
    sz += sys.mass[n] * sys.vz[n];
  }
  return {sx, sy, sz};
}

SimulationResult simulate(const Morphology& m, const ControllerScenario& scenario,
                          const SimConfig& cfg) {
  cfg.validate();
  SimulationResult result;
  result.voxel_count = voxel_count(m);
  if (result.voxel_count < 2 ||
      voxel_count(largest_component(m)) != result.voxel_count) {
    result.status = SimStatus::kInvalidMorphology;
    return result;
  }

  MassSpringSystem sys = build_lattice(m, cfg);
  assign_phases(sys, scenario);

  const int settle_steps = static_cast<int>(std::llround(cfg.settle_duration / cfg.timestep));
  const int run_steps = static_cast<int>(std::llround(cfg.run_duration / cfg.timestep));

  advance(sys, cfg, settle_steps, /*actuate=*/false);
  if (sys.unstable) {
    result.status = SimStatus::kUnstable;
    return result;
  }
  result.settled_com = com(sys);

  advance(sys, cfg, run_steps, /*actuate=*/true, /*t0=*/0.0);
  if (sys.unstable) {
    result.status = SimStatus::kUnstable;
    result.settled_com = Vec3{};
    return result;
  }
  result.final_com = com(sys);

  const double dx = result.final_com.x - result.settled_com.x;
  const double dy = result.final_com.y - result.settled_com.y;
  const double dz = result.final_com.z - result.settled_com.z;
  const double dist = cfg.planar_displacement ? std::sqrt(dx * dx + dy * dy)
                                              : std::sqrt(dx * dx + dy * dy + dz * dz);
  result.displacement = dist / cfg.voxel_edge;
  result.status = SimStatus::kOk;
  return result;
}

nlohmann::json sim_config_to_json(const SimConfig& cfg) {
  return {{"voxel_edge", cfg.voxel_edge},
          {"voxel_mass", cfg.voxel_mass},
          {"spring_stiffness", cfg.spring_stiffness},
          {"shear_stiffness", cfg.shear_stiffness},
          {"damping_ratio", cfg.damping_ratio},
          {"gravity", cfg.gravity},
          {"ground_stiffness", cfg.ground_stiffness},
          {"friction_coefficient", cfg.friction_coefficient},
          {"actuation_amplitude", cfg.actuation_amplitude},
          {"actuation_frequency", cfg.actuation_frequency},
          {"settle_duration", cfg.settle_duration},
          {"run_duration", cfg.run_duration},
          {"timestep", cfg.timestep},
          {"enable_ground", cfg.enable_ground},
          {"enable_actuation", cfg.enable_actuation},
          {"planar_displacement", cfg.planar_displacement}};
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("sim config must be a JSON object");
  SimConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "voxel_edge") cfg.voxel_edge = value.get<double>();
    else if (key == "voxel_mass") cfg.voxel_mass = value.get<double>();
    else if (key == "spring_stiffness") cfg.spring_stiffness = value.get<double>();
    else if (key == "shear_stiffness") cfg.shear_stiffness = value.get<double>();
    else if (key == "damping_ratio") cfg.damping_ratio = value.get<double>();
    else if (key == "gravity") cfg.gravity = value.get<double>();
    else if (key == "ground_stiffness") cfg.ground_stiffness = value.get<double>();
    else if (key == "friction_coefficient") cfg.friction_coefficient = value.get<double>();
    else if (key == "actuation_amplitude") cfg.actuation_amplitude = value.get<double>();
    else if (key == "actuation_frequency") cfg.actuation_frequency = value.get<double>();
    else if (key == "settle_duration") cfg.settle_duration = value.get<double>();
    else if (key == "run_duration") cfg.run_duration = value.get<double>();
    else if (key == "timestep") cfg.timestep = value.get<double>();
    else if (key == "enable_ground") cfg.enable_ground = value.get<bool>();
    else if (key == "enable_actuation") cfg.enable_actuation = value.get<bool>();
    else if (key == "planar_displacement") cfg.planar_displacement = value.get<bool>();
    else throw std::invalid_argument("sim config: unknown field '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace evovox
