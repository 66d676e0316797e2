#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "evovox/genome.hpp"

namespace evovox {

struct PaintingConfig {
  double weight_threshold = 0.2;
  double weight_range = 3.0;

  void validate() const;
};

// Fixed feed-forward layer stack whose weights are painted by a CPPN.
// Neurons carry planar coordinates: u = layer index normalized to [-1, 1],
// v = within-layer index normalized to [-1, 1] (single-neuron layer -> 0).
struct SubstrateLayout {
  std::vector<int> layer_sizes = {3, 5, 5, 2};
  ActivationFunction activation = ActivationFunction::kRelu;

  void validate() const;
  double neuron_u(int layer) const;
  double neuron_v(int layer, int index) const;
};

struct PhenotypeNetwork {
  SubstrateLayout layout;
  // weights[k][t][s]: connection from neuron s in layer k to neuron t in
  // layer k+1.
  std::vector<std::vector<std::vector<double>>> weights;
};

// Queries the CPPN at every adjacent-layer neuron pair (u1, v1, u2, v2, 1)
// and maps the raw output through the threshold/scale rule:
// |raw| <= threshold -> 0, else sign(raw)*(|raw|-t)/(1-t)*range, clamped to
// +-range for |raw| > 1.
PhenotypeNetwork paint(const CppnGenome& cppn, const SubstrateLayout& layout,
                       const PaintingConfig& cfg);

// Dense feed-forward pass; returns the two output activations (pv, m).
// Thresholding into voxel states is the decoder's job.
std::pair<double, double> query_substrate(const PhenotypeNetwork& net, double x,
                                          double y, double z);

nlohmann::json substrate_layout_to_json(const SubstrateLayout& layout);
SubstrateLayout substrate_layout_from_json(const nlohmann::json& j);
nlohmann::json painting_config_to_json(const PaintingConfig& cfg);
PaintingConfig painting_config_from_json(const nlohmann::json& j);
nlohmann::json phenotype_to_json(const PhenotypeNetwork& net);
PhenotypeNetwork phenotype_from_json(const nlohmann::json& j);

}  // namespace evovox
