#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace evovox {

struct LatticeDims {
  int nx = 8;
  int ny = 8;
  int nz = 7;

  int volume() const { return nx * ny * nz; }
  void validate() const;
  bool operator==(const LatticeDims&) const = default;
};

enum class VoxelState : std::uint8_t { kEmpty = 0, kPassive = 1, kActive = 2 };

// Dense voxel grid indexed x-fastest: index = x + nx*(y + ny*z).
struct Morphology {
  LatticeDims dims;
  std::vector<VoxelState> grid;
  std::string provenance;  // genome serial + decoder tag

  VoxelState at(int x, int y, int z) const {
    return grid[static_cast<std::size_t>(x + dims.nx * (y + dims.ny * z))];
  }
  VoxelState& at(int x, int y, int z) {
    return grid[static_cast<std::size_t>(x + dims.nx * (y + dims.ny * z))];
  }
};

Morphology make_empty_morphology(const LatticeDims& dims);

// Maps lattice index i in [0, n) to [-1, 1]; a single-cell axis maps to 0.
double normalize_coord(int i, int n);

// (pv, m) field sampled at normalized lattice coordinates.
using VoxelQuery = std::function<std::pair<double, double>(double x, double y, double z)>;

// Presence iff pv > 0; active iff m > 0, passive otherwise. The decoded grid
// is reduced to its largest face-connected component.
Morphology decode(const VoxelQuery& query, const LatticeDims& dims);

// Keeps only the largest 6-connected component of non-empty voxels; ties are
// broken in favour of the component whose seed voxel has the lowest (x, y, z)
// lexicographic coordinate.
Morphology largest_component(const Morphology& m);

int voxel_count(const Morphology& m);

// Run-length encoding over {E, P, A}, x-fastest, runs written <count><letter>.
std::string morphology_to_rle(const Morphology& m);
Morphology morphology_from_rle(const LatticeDims& dims, const std::string& rle);

// {"dims": [nx, ny, nz], "voxels": "<rle>"} — the wire/archive format.
nlohmann::json morphology_to_json(const Morphology& m);
Morphology morphology_from_json(const nlohmann::json& j);

}  // namespace evovox
