#include "evovox/genome.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace evovox {

namespace {

constexpr double kWeightReplaceLo = -3.0;
constexpr double kWeightReplaceHi = 3.0;

void sort_genome(CppnGenome& g) {
  std::sort(g.nodes.begin(), g.nodes.end(),
            [](const NodeGene& a, const NodeGene& b) { return a.id < b.id; });
  std::sort(g.connections.begin(), g.connections.end(),
            [](const ConnectionGene& a, const ConnectionGene& b) {
              return a.innovation < b.innovation;
            });
}

// Reachability over every connection, enabled or not. Disabled genes can be
// re-enabled by toggle mutations, so acyclicity must hold for the whole set.
bool path_exists(const CppnGenome& g, int from, int to) {
  if (from == to) return true;
  std::unordered_multimap<int, int> out;
  for (const auto& c : g.connections) out.emplace(c.source, c.target);
  std::unordered_set<int> seen{from};
  std::deque<int> frontier{from};
  while (!frontier.empty()) {
    int n = frontier.front();
    frontier.pop_front();
    auto [lo, hi] = out.equal_range(n);
    for (auto it = lo; it != hi; ++it) {
      if (it->second == to) return true;
      if (seen.insert(it->second).second) frontier.push_back(it->second);
    }
  }
  return false;
}

}  // namespace

void NeatParams::validate() const {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate_ok(survival_threshold) || !rate_ok(activation_mutate_rate) ||
      !rate_ok(add_connection_rate) || !rate_ok(delete_connection_rate) ||
      !rate_ok(toggle_connection_rate) || !rate_ok(add_node_rate) ||
      !rate_ok(delete_node_rate) || !rate_ok(weight_mutate_rate) ||
      !rate_ok(weight_replace_rate)) {
    throw std::invalid_argument("NeatParams: rates must lie in [0,1]");
  }
  if (compatibility_threshold <= 0.0)
    throw std::invalid_argument("NeatParams: compatibility_threshold must be positive");
  if (population_size < 2)
    throw std::invalid_argument("NeatParams: population_size must be at least 2");
  if (generations < 0)
    throw std::invalid_argument("NeatParams: generations must be non-negative");
  if (max_stagnation < 1)
    throw std::invalid_argument("NeatParams: max_stagnation must be at least 1");
  if (weight_perturb_sigma < 0.0)
    throw std::invalid_argument("NeatParams: weight_perturb_sigma must be non-negative");
}

std::int64_t InnovationRegistry::connection_innovation(int source, int target) {
  std::lock_guard<std::mutex> lock(mu_);
  auto key = std::make_pair(source, target);
  auto it = connection_this_gen_.find(key);
  if (it != connection_this_gen_.end()) return it->second;
  std::int64_t innov = next_innovation_++;
  connection_this_gen_.emplace(key, innov);
  return innov;
}

InnovationRegistry::NodeSplit InnovationRegistry::node_split(
    std::int64_t split_innovation, int source, int target) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = split_this_gen_.find(split_innovation);
  if (it != split_this_gen_.end()) return it->second;
  NodeSplit split;
  split.node_id = next_node_id_++;
  split.in_innovation = next_innovation_++;
  split.out_innovation = next_innovation_++;
  split_this_gen_.emplace(split_innovation, split);
  // The replacement connections are also recorded under the pair map so a
  // simultaneous add-connection of the same pair reuses the number.
  connection_this_gen_.insert({{source, split.node_id}, split.in_innovation});
  connection_this_gen_.insert({{split.node_id, target}, split.out_innovation});
  return split;
}

void InnovationRegistry::begin_generation() {
  std::lock_guard<std::mutex> lock(mu_);
  connection_this_gen_.clear();
  split_this_gen_.clear();
}

int InnovationRegistry::reserve_node_id() {
  std::lock_guard<std::mutex> lock(mu_);
  return next_node_id_++;
}

std::uint64_t InnovationRegistry::next_genome_serial() {
  std::lock_guard<std::mutex> lock(mu_);
  return next_serial_++;
}

void InnovationRegistry::advance_past(std::int64_t innovation, int node_id,
                                      std::uint64_t serial) {
  std::lock_guard<std::mutex> lock(mu_);
  next_innovation_ = std::max(next_innovation_, innovation);
  next_node_id_ = std::max(next_node_id_, node_id);
  next_serial_ = std::max(next_serial_, serial);
}

const NodeGene* CppnGenome::find_node(int id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const NodeGene& n, int v) { return n.id < v; });
  if (it != nodes.end() && it->id == id) return &*it;
  return nullptr;
}

const ConnectionGene* CppnGenome::find_connection(std::int64_t innovation) const {
  auto it = std::lower_bound(
      connections.begin(), connections.end(), innovation,
      [](const ConnectionGene& c, std::int64_t v) { return c.innovation < v; });
  if (it != connections.end() && it->innovation == innovation) return &*it;
  return nullptr;
}

bool CppnGenome::has_connection_between(int source, int target) const {
  for (const auto& c : connections) {
    if (c.source == source && c.target == target) return true;
  }
  return false;
}

CppnGenome make_initial_genome(int input_count, int output_count,
                               InnovationRegistry& registry, RandomSource& rng) {
  if (input_count < 1 || output_count < 1)
    throw std::invalid_argument("make_initial_genome: counts must be positive");
  CppnGenome g;
  g.serial = registry.next_genome_serial();
  g.input_count = input_count;
  g.output_count = output_count;
  // Input/output ids are fixed by position; mark them taken so node splits
  // never mint a colliding id.
  registry.advance_past(0, input_count + output_count, 0);
  auto set = cppn_activation_set();
  for (int i = 0; i < input_count; ++i) {
    g.nodes.push_back({i, NodeKind::kInput, ActivationFunction::kSigmoid, 0.0});
  }
  for (int o = 0; o < output_count; ++o) {
    ActivationFunction act = set[rng.uniform_index(set.size())];
    g.nodes.push_back({input_count + o, NodeKind::kOutput, act, 0.0});
  }
  for (int i = 0; i < input_count; ++i) {
    for (int o = 0; o < output_count; ++o) {
      ConnectionGene c;
      c.source = i;
      c.target = input_count + o;
      c.innovation = registry.connection_innovation(c.source, c.target);
      c.weight = rng.uniform(-1.0, 1.0);
      c.enabled = true;
      g.connections.push_back(c);
    }
  }
  sort_genome(g);
  return g;
}

std::vector<double> activate(const CppnGenome& genome, std::span<const double> inputs) {
  if (static_cast<int>(inputs.size()) != genome.input_count) {
    throw std::invalid_argument("activate: expected " +
                                std::to_string(genome.input_count) + " inputs, got " +
                                std::to_string(inputs.size()));
  }
  for (double v : inputs) {
    if (!std::isfinite(v)) throw std::invalid_argument("activate: inputs must be finite");
  }

  // Incoming enabled connections per node, ordered by source id so the
  // summation order is fixed.
  std::map<int, std::vector<const ConnectionGene*>> incoming;
  std::map<int, int> indegree;
  for (const auto& n : genome.nodes) indegree[n.id] = 0;
  for (const auto& c : genome.connections) {
    if (!c.enabled) continue;
    incoming[c.target].push_back(&c);
    ++indegree[c.target];
  }
  for (auto& [id, conns] : incoming) {
    std::sort(conns.begin(), conns.end(),
              [](const ConnectionGene* a, const ConnectionGene* b) {
                return a->source < b->source;
              });
  }

  std::map<int, double> value;
  std::set<int> ready;
  for (const auto& n : genome.nodes) {
    if (n.kind == NodeKind::kInput) {
      value[n.id] = inputs[static_cast<std::size_t>(n.id)];
    }
    if (indegree[n.id] == 0) ready.insert(n.id);
  }

  std::unordered_multimap<int, const ConnectionGene*> outgoing;
  for (const auto& c : genome.connections) {
    if (c.enabled) outgoing.emplace(c.source, &c);
  }

  std::size_t processed = 0;
  while (!ready.empty()) {
    int id = *ready.begin();
    ready.erase(ready.begin());
    ++processed;
    const NodeGene* node = genome.find_node(id);
    if (node->kind != NodeKind::kInput) {
      double z = node->bias;
      for (const ConnectionGene* c : incoming[id]) {
        z += c->weight * value[c->source];
      }
      value[id] = apply_activation(node->activation, z);
    }
    auto [lo, hi] = outgoing.equal_range(id);
    for (auto it = lo; it != hi; ++it) {
      if (--indegree[it->second->target] == 0) ready.insert(it->second->target);
    }
  }
  if (processed != genome.nodes.size()) {
    throw MalformedGenomeError("activate: cycle detected in connection graph");
  }

  std::vector<double> outputs;
  outputs.reserve(static_cast<std::size_t>(genome.output_count));
  for (int o = 0; o < genome.output_count; ++o) {
    outputs.push_back(value[genome.input_count + o]);
  }
  return outputs;
}

namespace {

void mutate_weights(CppnGenome& g, const NeatParams& p, RandomSource& rng,
                    MutationStats* stats) {
  for (auto& c : g.connections) {
    if (!rng.chance(p.weight_mutate_rate)) continue;
    if (rng.chance(p.weight_replace_rate)) {
      c.weight = rng.uniform(kWeightReplaceLo, kWeightReplaceHi);
      if (stats) ++stats->weight_replacements;
    } else {
      c.weight += rng.gaussian(0.0, p.weight_perturb_sigma);
      if (stats) ++stats->weight_perturbations;
    }
  }
  // Biases follow the same policy as weights.
  for (auto& n : g.nodes) {
    if (n.kind == NodeKind::kInput) continue;
    if (!rng.chance(p.weight_mutate_rate)) continue;
    if (rng.chance(p.weight_replace_rate)) {
      n.bias = rng.uniform(kWeightReplaceLo, kWeightReplaceHi);
    } else {
      n.bias += rng.gaussian(0.0, p.weight_perturb_sigma);
    }
    if (stats) ++stats->bias_mutations;
  }
}

void mutate_activations(CppnGenome& g, const NeatParams& p, RandomSource& rng,
                        MutationStats* stats) {
  auto set = cppn_activation_set();
  for (auto& n : g.nodes) {
    if (n.kind == NodeKind::kInput) continue;
    if (!rng.chance(p.activation_mutate_rate)) continue;
    n.activation = set[rng.uniform_index(set.size())];
    if (stats) ++stats->activation_mutations;
  }
}

void mutate_add_node(CppnGenome& g, InnovationRegistry& registry, RandomSource& rng) {
  std::vector<std::size_t> enabled;
  for (std::size_t i = 0; i < g.connections.size(); ++i) {
    if (g.connections[i].enabled) enabled.push_back(i);
  }
  if (enabled.empty()) return;
  std::size_t pick = enabled[rng.uniform_index(enabled.size())];
  ConnectionGene& old = g.connections[pick];
  auto split = registry.node_split(old.innovation, old.source, old.target);
  if (g.find_node(split.node_id) != nullptr) return;  // same split twice in one genome

  old.enabled = false;
  auto set = cppn_activation_set();
  NodeGene node;
  node.id = split.node_id;
  node.kind = NodeKind::kHidden;
  node.activation = set[rng.uniform_index(set.size())];
  node.bias = 0.0;

  ConnectionGene in;
  in.innovation = split.in_innovation;
  in.source = old.source;
  in.target = node.id;
  in.weight = 1.0;
  in.enabled = true;

  ConnectionGene out;
  out.innovation = split.out_innovation;
  out.source = node.id;
  out.target = old.target;
  out.weight = old.weight;
  out.enabled = true;

  g.nodes.push_back(node);
  g.connections.push_back(in);
  g.connections.push_back(out);
  sort_genome(g);
}

void mutate_add_connection(CppnGenome& g, InnovationRegistry& registry,
                           RandomSource& rng) {
  std::vector<int> sources;
  std::vector<int> targets;
  for (const auto& n : g.nodes) {
    if (n.kind != NodeKind::kOutput) sources.push_back(n.id);
    if (n.kind != NodeKind::kInput) targets.push_back(n.id);
  }
  if (sources.empty() || targets.empty()) return;
  for (int attempt = 0; attempt < 20; ++attempt) {
    int s = sources[rng.uniform_index(sources.size())];
    int t = targets[rng.uniform_index(targets.size())];
    if (s == t) continue;
    if (g.has_connection_between(s, t)) continue;
    if (path_exists(g, t, s)) continue;  // would close a cycle
    ConnectionGene c;
    c.innovation = registry.connection_innovation(s, t);
    c.source = s;
    c.target = t;
    c.weight = rng.uniform(-1.0, 1.0);
    c.enabled = true;
    g.connections.push_back(c);
    sort_genome(g);
    return;
  }
}

void mutate_delete_node(CppnGenome& g, RandomSource& rng) {
  std::vector<int> hidden;
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::kHidden) hidden.push_back(n.id);
  }
  if (hidden.empty()) return;
  int victim = hidden[rng.uniform_index(hidden.size())];
  g.nodes.erase(std::remove_if(g.nodes.begin(), g.nodes.end(),
                               [victim](const NodeGene& n) { return n.id == victim; }),
                g.nodes.end());
  g.connections.erase(
      std::remove_if(g.connections.begin(), g.connections.end(),
                     [victim](const ConnectionGene& c) {
                       return c.source == victim || c.target == victim;
                     }),
      g.connections.end());
}

void mutate_delete_connection(CppnGenome& g, RandomSource& rng) {
  if (g.connections.empty()) return;
  std::size_t pick = rng.uniform_index(g.connections.size());
  g.connections.erase(g.connections.begin() + static_cast<std::ptrdiff_t>(pick));
}

void mutate_toggle_connection(CppnGenome& g, RandomSource& rng) {
  if (g.connections.empty()) return;
  std::size_t pick = rng.uniform_index(g.connections.size());
  g.connections[pick].enabled = !g.connections[pick].enabled;
}

}  // namespace

CppnGenome mutate(const CppnGenome& genome, const NeatParams& params,
                  InnovationRegistry& registry, RandomSource& rng,
                  MutationStats* stats) {
  CppnGenome g = genome;
  g.serial = registry.next_genome_serial();

  mutate_weights(g, params, rng, stats);
  mutate_activations(g, params, rng, stats);
  if (rng.chance(params.add_node_rate)) {
    if (stats) ++stats->add_node_attempts;
    mutate_add_node(g, registry, rng);
  }
  if (rng.chance(params.add_connection_rate)) {
    if (stats) ++stats->add_connection_attempts;
    mutate_add_connection(g, registry, rng);
  }
  if (rng.chance(params.delete_node_rate)) {
    if (stats) ++stats->delete_node_attempts;
    mutate_delete_node(g, rng);
  }
  if (rng.chance(params.delete_connection_rate)) {
    if (stats) ++stats->delete_connection_attempts;
    mutate_delete_connection(g, rng);
  }
  if (rng.chance(params.toggle_connection_rate)) {
    if (stats) ++stats->toggle_attempts;
    mutate_toggle_connection(g, rng);
  }
  return g;
}

CppnGenome crossover(const CppnGenome& fitter, const CppnGenome& other,
                     InnovationRegistry& registry, RandomSource& rng) {
  if (fitter.input_count != other.input_count ||
      fitter.output_count != other.output_count) {
    throw std::invalid_argument("crossover: parents have mismatched input/output counts");
  }
  CppnGenome child;
  child.serial = registry.next_genome_serial();
  child.input_count = fitter.input_count;
  child.output_count = fitter.output_count;

  // Structure follows the fitter parent; matching genes come from either
  // parent with equal probability.
  for (const auto& node : fitter.nodes) {
    NodeGene n = node;
    if (const NodeGene* o = other.find_node(node.id); o != nullptr) {
      if (rng.chance(0.5)) {
        n.activation = o->activation;
        n.bias = o->bias;
      }
    }
    child.nodes.push_back(n);
  }
  for (const auto& conn : fitter.connections) {
    ConnectionGene c = conn;
    if (const ConnectionGene* o = other.find_connection(conn.innovation); o != nullptr) {
      if (rng.chance(0.5)) {
        c.weight = o->weight;
        c.enabled = o->enabled;
      }
    }
    child.connections.push_back(c);
  }
  return child;
}

double distance(const CppnGenome& a, const CppnGenome& b, const NeatParams& params) {
  if (a.input_count != b.input_count || a.output_count != b.output_count) {
    throw std::invalid_argument("distance: genomes have mismatched input/output counts");
  }

  std::size_t unmatched = 0;
  std::size_t matching_nodes = 0;
  double activation_mismatches = 0.0;
  {
    auto ia = a.nodes.begin();
    auto ib = b.nodes.begin();
    while (ia != a.nodes.end() || ib != b.nodes.end()) {
      if (ib == b.nodes.end() || (ia != a.nodes.end() && ia->id < ib->id)) {
        ++unmatched;
        ++ia;
      } else if (ia == a.nodes.end() || ib->id < ia->id) {
        ++unmatched;
        ++ib;
      } else {
        ++matching_nodes;
        if (ia->activation != ib->activation) activation_mismatches += 1.0;
        ++ia;
        ++ib;
      }
    }
  }

  std::size_t matching_conns = 0;
  double weight_delta_sum = 0.0;
  {
    auto ia = a.connections.begin();
    auto ib = b.connections.begin();
    while (ia != a.connections.end() || ib != b.connections.end()) {
      if (ib == b.connections.end() ||
          (ia != a.connections.end() && ia->innovation < ib->innovation)) {
        ++unmatched;
        ++ia;
      } else if (ia == a.connections.end() || ib->innovation < ia->innovation) {
        ++unmatched;
        ++ib;
      } else {
        ++matching_conns;
        weight_delta_sum += std::fabs(ia->weight - ib->weight);
        ++ia;
        ++ib;
      }
    }
  }

  constexpr std::size_t kSmallGenome = 20;
  double n = 1.0;
  if (a.gene_count() >= kSmallGenome || b.gene_count() >= kSmallGenome) {
    n = static_cast<double>(std::max(a.gene_count(), b.gene_count()));
  }
  double w = activation_mismatches;
  if (matching_conns > 0) w += weight_delta_sum / static_cast<double>(matching_conns);
  return params.disjoint_coefficient * static_cast<double>(unmatched) / n +
         params.weight_coefficient * w;
}

bool is_feed_forward(const CppnGenome& genome) {
  std::map<int, int> indegree;
  for (const auto& n : genome.nodes) indegree[n.id] = 0;
  for (const auto& c : genome.connections) {
    if (c.source == c.target) return false;
    if (genome.find_node(c.source) == nullptr || genome.find_node(c.target) == nullptr)
      return false;
    ++indegree[c.target];
  }
  // Kahn's algorithm over all connections.
  std::unordered_multimap<int, int> out;
  for (const auto& c : genome.connections) out.emplace(c.source, c.target);
  std::deque<int> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push_back(id);
  }
  std::size_t processed = 0;
  while (!ready.empty()) {
    int id = ready.front();
    ready.pop_front();
    ++processed;
    auto [lo, hi] = out.equal_range(id);
    for (auto it = lo; it != hi; ++it) {
      if (--indegree[it->second] == 0) ready.push_back(it->second);
    }
  }
  if (processed != genome.nodes.size()) return false;

  int inputs = 0;
  int outputs = 0;
  for (const auto& n : genome.nodes) {
    if (n.kind == NodeKind::kInput) ++inputs;
    if (n.kind == NodeKind::kOutput) ++outputs;
  }
  return inputs == genome.input_count && outputs == genome.output_count;
}

namespace {

std::string kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::kInput: return "input";
    case NodeKind::kHidden: return "hidden";
    case NodeKind::kOutput: return "output";
  }
  throw std::logic_error("kind_name: bad node kind");
}

NodeKind kind_from_name(const std::string& s) {
  if (s == "input") return NodeKind::kInput;
  if (s == "hidden") return NodeKind::kHidden;
  if (s == "output") return NodeKind::kOutput;
  throw std::invalid_argument("unknown node kind: " + s);
}

}  // namespace

nlohmann::json genome_to_json(const CppnGenome& genome) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : genome.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", kind_name(n.kind)},
                     {"activation", std::string(activation_name(n.activation))},
                     {"bias", n.bias}});
  }
  nlohmann::json conns = nlohmann::json::array();
  for (const auto& c : genome.connections) {
    conns.push_back({{"innovation", c.innovation},
                     {"source", c.source},
                     {"target", c.target},
                     {"weight", c.weight},
                     {"enabled", c.enabled}});
  }
  return {{"serial", genome.serial},
          {"input_count", genome.input_count},
          {"output_count", genome.output_count},
          {"nodes", std::move(nodes)},
          {"connections", std::move(conns)}};
}

CppnGenome genome_from_json(const nlohmann::json& j) {
  CppnGenome g;
  g.serial = j.at("serial").get<std::uint64_t>();
  g.input_count = j.at("input_count").get<int>();
  g.output_count = j.at("output_count").get<int>();
  for (const auto& jn : j.at("nodes")) {
    NodeGene n;
    n.id = jn.at("id").get<int>();
    n.kind = kind_from_name(jn.at("kind").get<std::string>());
    n.activation = activation_from_name(jn.at("activation").get<std::string>());
    n.bias = jn.at("bias").get<double>();
    g.nodes.push_back(n);
  }
  for (const auto& jc : j.at("connections")) {
    ConnectionGene c;
    c.innovation = jc.at("innovation").get<std::int64_t>();
    c.source = jc.at("source").get<int>();
    c.target = jc.at("target").get<int>();
    c.weight = jc.at("weight").get<double>();
    c.enabled = jc.at("enabled").get<bool>();
    g.connections.push_back(c);
  }
  sort_genome(g);
  if (!is_feed_forward(g)) throw MalformedGenomeError("genome_from_json: graph is not feed-forward");
  return g;
}

nlohmann::json neat_params_to_json(const NeatParams& p) {
  return {{"compatibility_threshold", p.compatibility_threshold},
          {"disjoint_coefficient", p.disjoint_coefficient},
          {"weight_coefficient", p.weight_coefficient},
          {"max_stagnation", p.max_stagnation},
          {"survival_threshold", p.survival_threshold},
          {"activation_mutate_rate", p.activation_mutate_rate},
          {"add_connection_rate", p.add_connection_rate},
          {"delete_connection_rate", p.delete_connection_rate},
          {"toggle_connection_rate", p.toggle_connection_rate},
          {"add_node_rate", p.add_node_rate},
          {"delete_node_rate", p.delete_node_rate},
          {"weight_mutate_rate", p.weight_mutate_rate},
          {"weight_perturb_sigma", p.weight_perturb_sigma},
          {"weight_replace_rate", p.weight_replace_rate},
          {"population_size", p.population_size},
          {"generations", p.generations}};
}

NeatParams neat_params_from_json(const nlohmann::json& j) {
  NeatParams p;
  p.compatibility_threshold = j.value("compatibility_threshold", p.compatibility_threshold);
  p.disjoint_coefficient = j.value("disjoint_coefficient", p.disjoint_coefficient);
  p.weight_coefficient = j.value("weight_coefficient", p.weight_coefficient);
  p.max_stagnation = j.value("max_stagnation", p.max_stagnation);
  p.survival_threshold = j.value("survival_threshold", p.survival_threshold);
  p.activation_mutate_rate = j.value("activation_mutate_rate", p.activation_mutate_rate);
  p.add_connection_rate = j.value("add_connection_rate", p.add_connection_rate);
  p.delete_connection_rate = j.value("delete_connection_rate", p.delete_connection_rate);
  p.toggle_connection_rate = j.value("toggle_connection_rate", p.toggle_connection_rate);
  p.add_node_rate = j.value("add_node_rate", p.add_node_rate);
  p.delete_node_rate = j.value("delete_node_rate", p.delete_node_rate);
  p.weight_mutate_rate = j.value("weight_mutate_rate", p.weight_mutate_rate);
  p.weight_perturb_sigma = j.value("weight_perturb_sigma", p.weight_perturb_sigma);
  p.weight_replace_rate = j.value("weight_replace_rate", p.weight_replace_rate);
  p.population_size = j.value("population_size", p.population_size);
  p.generations = j.value("generations", p.generations);
  p.validate();
  return p;
}

}  // namespace evovox
