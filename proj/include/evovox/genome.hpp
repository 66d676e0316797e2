#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evovox/activation.hpp"
#include "evovox/rng.hpp"

#include <json.hpp>

namespace evovox {

class MalformedGenomeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { kInput, kHidden, kOutput };

struct NodeGene {
  int id = 0;
  NodeKind kind = NodeKind::kHidden;
  ActivationFunction activation = ActivationFunction::kSigmoid;
  double bias = 0.0;
};

struct ConnectionGene {
  std::int64_t innovation = 0;
  int source = 0;
  int target = 0;
  double weight = 0.0;
  bool enabled = true;
};

// Mutation/speciation knobs. Defaults follow the evolved-CPPN parameter table;
// the weight-mutation trio is a conventional NEAT choice exposed here because
// the table omits it.
struct NeatParams {
  double compatibility_threshold = 3.0;
  double disjoint_coefficient = 1.0;
  double weight_coefficient = 0.5;
  int max_stagnation = 15;
  double survival_threshold = 0.3;
  double activation_mutate_rate = 0.4;
  double add_connection_rate = 0.3;
  double delete_connection_rate = 0.2;
  double toggle_connection_rate = 0.5;
  double add_node_rate = 0.3;
  double delete_node_rate = 0.2;
  double weight_mutate_rate = 0.8;
  double weight_perturb_sigma = 0.5;
  double weight_replace_rate = 0.1;
  int population_size = 50;
  int generations = 1000;

  void validate() const;
};

// Run-wide innovation bookkeeping. Structural innovations discovered twice
// within one generation share a number; begin_generation() opens a new reuse
// window. Assignments are serialized: this is the only mutable state shared
// between concurrently constructed genomes.
class InnovationRegistry {
 public:
  InnovationRegistry() = default;

  struct NodeSplit {
    int node_id;
    std::int64_t in_innovation;   // source -> new node
    std::int64_t out_innovation;  // new node -> target
  };

  std::int64_t connection_innovation(int source, int target);
  NodeSplit node_split(std::int64_t split_innovation, int source, int target);
  void begin_generation();

  int reserve_node_id();
  std::uint64_t next_genome_serial();

  // Ids below these values are considered taken (used when restoring from a
  // checkpoint).
  void advance_past(std::int64_t innovation, int node_id, std::uint64_t serial);
  std::int64_t innovation_watermark() const { return next_innovation_; }
  int node_id_watermark() const { return next_node_id_; }
  std::uint64_t serial_watermark() const { return next_serial_; }

 private:
  mutable std::mutex mu_;
  std::int64_t next_innovation_ = 0;
  int next_node_id_ = 0;
  std::uint64_t next_serial_ = 0;
  std::map<std::pair<int, int>, std::int64_t> connection_this_gen_;
  std::map<std::int64_t, NodeSplit> split_this_gen_;
};

// Evolvable feed-forward CPPN. Immutable by convention: operators return new
// genomes. nodes are kept sorted by id, connections by innovation.
struct CppnGenome {
  std::uint64_t serial = 0;
  int input_count = 3;
  int output_count = 2;
  std::vector<NodeGene> nodes;
  std::vector<ConnectionGene> connections;

  const NodeGene* find_node(int id) const;
  const ConnectionGene* find_connection(std::int64_t innovation) const;
  bool has_connection_between(int source, int target) const;
  int hidden_count() const {
    return static_cast<int>(nodes.size()) - input_count - output_count;
  }
  std::size_t gene_count() const { return nodes.size() + connections.size(); }
};

// Fully connected input->output starter genome: weights ~ U(-1,1), output
// activations drawn from the CPPN set, biases zero, no hidden nodes.
CppnGenome make_initial_genome(int input_count, int output_count,
                               InnovationRegistry& registry, RandomSource& rng);

// Feed-forward evaluation by topological traversal of enabled connections.
std::vector<double> activate(const CppnGenome& genome, std::span<const double> inputs);

struct MutationStats {
  int weight_perturbations = 0;
  int weight_replacements = 0;
  int bias_mutations = 0;
  int activation_mutations = 0;
  int add_node_attempts = 0;
  int add_connection_attempts = 0;
  int delete_node_attempts = 0;
  int delete_connection_attempts = 0;
  int toggle_attempts = 0;
};

CppnGenome mutate(const CppnGenome& genome, const NeatParams& params,
                  InnovationRegistry& registry, RandomSource& rng,
                  MutationStats* stats = nullptr);

// NEAT crossover: matching genes drawn uniformly from either parent,
// disjoint/excess genes inherited from the fitter parent.
CppnGenome crossover(const CppnGenome& fitter, const CppnGenome& other,
                     InnovationRegistry& registry, RandomSource& rng);

// Compatibility distance:
//   disjoint_coefficient * (D+E)/N + weight_coefficient * W
// where D+E counts genes (nodes by id, connections by innovation) present in
// only one genome, N = max total gene count (1 when both genomes hold fewer
// than 20 genes), and W = mean |weight delta| over matching connections plus
// one per matching node whose activation differs.
double distance(const CppnGenome& a, const CppnGenome& b, const NeatParams& params);

// Acyclicity over all connections, enabled or not, plus referential checks.
bool is_feed_forward(const CppnGenome& genome);

// Canonical JSON: nodes sorted by id, connections by innovation.
nlohmann::json genome_to_json(const CppnGenome& genome);
CppnGenome genome_from_json(const nlohmann::json& j);

nlohmann::json neat_params_to_json(const NeatParams& params);
NeatParams neat_params_from_json(const nlohmann::json& j);

}  // namespace evovox
