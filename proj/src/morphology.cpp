#include "evovox/morphology.hpp"

#include <array>
#include <deque>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

namespace evovox {

void LatticeDims::validate() const {
  if (nx < 1 || ny < 1 || nz < 1)
    throw std::invalid_argument("LatticeDims: all dimensions must be at least 1");
}

Morphology make_empty_morphology(const LatticeDims& dims) {
  dims.validate();
  Morphology m;
  m.dims = dims;
  m.grid.assign(static_cast<std::size_t>(dims.volume()), VoxelState::kEmpty);
  return m;
}

double normalize_coord(int i, int n) {
  if (i < 0 || i >= n)
    throw std::invalid_argument("normalize_coord: index outside [0, n)");
  if (n == 1) return 0.0;
  return 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
}

Morphology decode(const VoxelQuery& query, const LatticeDims& dims) {
  Morphology m = make_empty_morphology(dims);
  for (int z = 0; z < dims.nz; ++z) {
    const double zn = normalize_coord(z, dims.nz);
    for (int y = 0; y < dims.ny; ++y) {
      const double yn = normalize_coord(y, dims.ny);
      for (int x = 0; x < dims.nx; ++x) {
        const double xn = normalize_coord(x, dims.nx);
        auto [pv, mat] = query(xn, yn, zn);
        if (pv > 0.0) {
          m.at(x, y, z) = mat > 0.0 ? VoxelState::kActive : VoxelState::kPassive;
        }
      }
    }
  }
  return largest_component(m);
}

Morphology largest_component(const Morphology& m) {
  const auto& d = m.dims;
  std::vector<int> label(m.grid.size(), -1);
  int best_label = -1;
  int best_size = 0;
  int next_label = 0;

  static constexpr std::array<std::array<int, 3>, 6> kFaces = {
      {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};

  // Scan in (x, y, z) lexicographic order: the first voxel reached in a
  // component is its lowest seed, so "keep first on ties" implements the
  // tie-break directly.
  for (int x = 0; x < d.nx; ++x) {
    for (int y = 0; y < d.ny; ++y) {
      for (int z = 0; z < d.nz; ++z) {
        const std::size_t idx = static_cast<std::size_t>(x + d.nx * (y + d.ny * z));
        if (m.grid[idx] == VoxelState::kEmpty || label[idx] >= 0) continue;
        const int this_label = next_label++;
        int size = 0;
        std::deque<std::tuple<int, int, int>> frontier{{x, y, z}};
        label[idx] = this_label;
        while (!frontier.empty()) {
          auto [cx, cy, cz] = frontier.front();
          frontier.pop_front();
          ++size;
          for (const auto& f : kFaces) {
            const int nx2 = cx + f[0], ny2 = cy + f[1], nz2 = cz + f[2];
            if (nx2 < 0 || nx2 >= d.nx || ny2 < 0 || ny2 >= d.ny || nz2 < 0 ||
                nz2 >= d.nz)
              continue;
            const std::size_t nidx =
                static_cast<std::size_t>(nx2 + d.nx * (ny2 + d.ny * nz2));
            if (m.grid[nidx] == VoxelState::kEmpty || label[nidx] >= 0) continue;
            label[nidx] = this_label;
            frontier.push_back({nx2, ny2, nz2});
          }
        }
        if (size > best_size) {
          best_size = size;
          best_label = this_label;
        }
      }
    }
  }

  Morphology out = m;
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    if (label[i] != best_label) out.grid[i] = VoxelState::kEmpty;
  }
  return out;
}

int voxel_count(const Morphology& m) {
  int count = 0;
  for (VoxelState v : m.grid) {
    if (v != VoxelState::kEmpty) ++count;
  }
  return count;
}

namespace {

char state_letter(VoxelState s) {
  switch (s) {
    case VoxelState::kEmpty: return 'E';
    case VoxelState::kPassive: return 'P';
    case VoxelState::kActive: return 'A';
  }
  throw std::logic_error("state_letter: bad voxel state");
}

VoxelState state_from_letter(char c) {
  switch (c) {
    case 'E': return VoxelState::kEmpty;
    case 'P': return VoxelState::kPassive;
    case 'A': return VoxelState::kActive;
    default: throw std::invalid_argument(std::string("bad RLE letter: ") + c);
  }
}

}  // namespace

std::string morphology_to_rle(const Morphology& m) {
  std::string out;
  std::size_t i = 0;
  while (i < m.grid.size()) {
    std::size_t run = 1;
    while (i + run < m.grid.size() && m.grid[i + run] == m.grid[i]) ++run;
    out += std::to_string(run);
    out += state_letter(m.grid[i]);
    i += run;
  }
  return out;
}

Morphology morphology_from_rle(const LatticeDims& dims, const std::string& rle) {
  Morphology m = make_empty_morphology(dims);
  std::size_t pos = 0;
  std::size_t cell = 0;
  while (pos < rle.size()) {
    std::size_t digits = 0;
    while (pos + digits < rle.size() && std::isdigit(static_cast<unsigned char>(rle[pos + digits])))
      ++digits;
    if (digits == 0) throw std::invalid_argument("morphology_from_rle: run missing count");
    if (pos + digits >= rle.size())
      throw std::invalid_argument("morphology_from_rle: run missing state letter");
    const std::size_t run = std::stoull(rle.substr(pos, digits));
    const VoxelState s = state_from_letter(rle[pos + digits]);
    if (run == 0 || cell + run > m.grid.size())
      throw std::invalid_argument("morphology_from_rle: run length out of range");
    for (std::size_t k = 0; k < run; ++k) m.grid[cell++] = s;
    pos += digits + 1;
  }
  if (cell != m.grid.size())
    throw std::invalid_argument("morphology_from_rle: runs do not cover the lattice");
  return m;
}

nlohmann::json morphology_to_json(const Morphology& m) {
  return {{"dims", {m.dims.nx, m.dims.ny, m.dims.nz}}, {"voxels", morphology_to_rle(m)}};
}

Morphology morphology_from_json(const nlohmann::json& j) {
  const auto& dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 3)
    throw std::invalid_argument("morphology_from_json: dims must be [nx, ny, nz]");
  LatticeDims d{dims[0].get<int>(), dims[1].get<int>(), dims[2].get<int>()};
  return morphology_from_rle(d, j.at("voxels").get<std::string>());
}

}  // namespace evovox
