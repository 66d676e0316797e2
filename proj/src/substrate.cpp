#include "evovox/substrate.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "evovox/morphology.hpp"

namespace evovox {

void PaintingConfig::validate() const {
  if (!(weight_threshold >= 0.0 && weight_threshold < 1.0))
    throw std::invalid_argument("PaintingConfig: weight_threshold must be in [0, 1)");
  if (!(weight_threshold < weight_range))
    throw std::invalid_argument("PaintingConfig: weight_threshold must be below weight_range");
}

void SubstrateLayout::validate() const {
  if (layer_sizes.size() < 3)
    throw std::invalid_argument("SubstrateLayout: need input, >=1 hidden, output layers");
  if (layer_sizes.front() != 3 || layer_sizes.back() != 2)
    throw std::invalid_argument("SubstrateLayout: layer sizes must start at 3 and end at 2");
  const std::size_t hidden = layer_sizes.size() - 2;
  if (hidden < 1 || hidden > 7)
    throw std::invalid_argument("SubstrateLayout: hidden layer count must be in [1, 7]");
  for (std::size_t k = 1; k + 1 < layer_sizes.size(); ++k) {
    if (layer_sizes[k] < 1 || layer_sizes[k] > 7)
      throw std::invalid_argument("SubstrateLayout: hidden layer sizes must be in [1, 7]");
  }
}

double SubstrateLayout::neuron_u(int layer) const {
  return normalize_coord(layer, static_cast<int>(layer_sizes.size()));
}

double SubstrateLayout::neuron_v(int layer, int index) const {
  return normalize_coord(index, layer_sizes.at(static_cast<std::size_t>(layer)));
}

namespace {

double scale_weight(double raw, const PaintingConfig& cfg) {
  const double mag = std::fabs(raw);
  if (mag <= cfg.weight_threshold) return 0.0;
  if (mag > 1.0) return raw > 0.0 ? cfg.weight_range : -cfg.weight_range;
  const double scaled =
      (mag - cfg.weight_threshold) / (1.0 - cfg.weight_threshold) * cfg.weight_range;
  return raw > 0.0 ? scaled : -scaled;
}

}  // namespace

PhenotypeNetwork paint(const CppnGenome& cppn, const SubstrateLayout& layout,
                       const PaintingConfig& cfg) {
  if (cppn.input_count != 5 || cppn.output_count != 1)
    throw std::invalid_argument("paint: CPPN must have 5 inputs and 1 output");
  layout.validate();
  cfg.validate();

  PhenotypeNetwork net;
  net.layout = layout;
  net.weights.resize(layout.layer_sizes.size() - 1);
  for (std::size_t k = 0; k + 1 < layout.layer_sizes.size(); ++k) {
    const int sources = layout.layer_sizes[k];
    const int targets = layout.layer_sizes[k + 1];
    const double u1 = layout.neuron_u(static_cast<int>(k));
    const double u2 = layout.neuron_u(static_cast<int>(k + 1));
    net.weights[k].assign(static_cast<std::size_t>(targets),
                          std::vector<double>(static_cast<std::size_t>(sources), 0.0));
    for (int t = 0; t < targets; ++t) {
      const double v2 = layout.neuron_v(static_cast<int>(k + 1), t);
      for (int s = 0; s < sources; ++s) {
        const double v1 = layout.neuron_v(static_cast<int>(k), s);
        const std::array<double, 5> coords{u1, v1, u2, v2, 1.0};
        const double raw = activate(cppn, coords)[0];
        net.weights[k][static_cast<std::size_t>(t)][static_cast<std::size_t>(s)] =
            scale_weight(raw, cfg);
      }
    }
  }
  return net;
}

std::pair<double, double> query_substrate(const PhenotypeNetwork& net, double x,
                                          double y, double z) {
  std::vector<double> current = {x, y, z};
  for (const auto& matrix : net.weights) {
    std::vector<double> next(matrix.size(), 0.0);
    for (std::size_t t = 0; t < matrix.size(); ++t) {
      double sum = 0.0;
      for (std::size_t s = 0; s < matrix[t].size(); ++s) sum += matrix[t][s] * current[s];
      next[t] = apply_activation(net.layout.activation, sum);
    }
    current = std::move(next);
  }
  return {current[0], current[1]};
}

nlohmann::json substrate_layout_to_json(const SubstrateLayout& layout) {
  return {{"layer_sizes", layout.layer_sizes},
          {"activation", activation_name(layout.activation)}};
}

SubstrateLayout substrate_layout_from_json(const nlohmann::json& j) {
  SubstrateLayout layout;
  layout.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  if (j.contains("activation"))
    layout.activation = activation_from_name(j.at("activation").get<std::string>());
  layout.validate();
  return layout;
}

nlohmann::json painting_config_to_json(const PaintingConfig& cfg) {
  return {{"weight_threshold", cfg.weight_threshold}, {"weight_range", cfg.weight_range}};
}

PaintingConfig painting_config_from_json(const nlohmann::json& j) {
  PaintingConfig cfg;
  cfg.weight_threshold = j.value("weight_threshold", cfg.weight_threshold);
  cfg.weight_range = j.value("weight_range", cfg.weight_range);
  cfg.validate();
  return cfg;
}

nlohmann::json phenotype_to_json(const PhenotypeNetwork& net) {
  return {{"layout", substrate_layout_to_json(net.layout)}, {"weights", net.weights}};
}

PhenotypeNetwork phenotype_from_json(const nlohmann::json& j) {
  PhenotypeNetwork net;
  net.layout = substrate_layout_from_json(j.at("layout"));
  net.weights = j.at("weights").get<std::vector<std::vector<std::vector<double>>>>();
  return net;
}

}  // namespace evovox
