#include <doctest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "evovox/genome.hpp"

#include "oracles.hpp"

using namespace evovox;

namespace {

CppnGenome random_genome(InnovationRegistry& registry, RandomSource& rng, int rounds) {
  NeatParams params;
  CppnGenome g = make_initial_genome(3, 2, registry, rng);
  for (int i = 0; i < rounds; ++i) g = mutate(g, params, registry, rng);
  return g;
}

}  // namespace

TEST_CASE("initial genome is fully connected input->output") {
  InnovationRegistry registry;
  RandomSource rng(1);
  CppnGenome g = make_initial_genome(3, 2, registry, rng);
  CHECK(g.nodes.size() == 5);
  CHECK(g.connections.size() == 6);
  CHECK(g.hidden_count() == 0);
  for (const auto& c : g.connections) {
    CHECK(c.enabled);
    CHECK(c.weight >= -1.0);
    CHECK(c.weight <= 1.0);
    CHECK(c.source < 3);
    CHECK(c.target >= 3);
  }
  for (int i = 0; i < 3; ++i) CHECK(g.find_node(i)->kind == NodeKind::kInput);
  for (int o = 3; o < 5; ++o) CHECK(g.find_node(o)->kind == NodeKind::kOutput);
  CHECK(is_feed_forward(g));

  // Two initial genomes share the same innovation numbers for the same pairs.
  CppnGenome h = make_initial_genome(3, 2, registry, rng);
  for (std::size_t i = 0; i < g.connections.size(); ++i) {
    CHECK(g.connections[i].innovation == h.connections[i].innovation);
  }
  CHECK(g.serial != h.serial);
}

TEST_CASE("activate matches the recursive oracle on random genomes") {
  InnovationRegistry registry;
  RandomSource rng(2);
  for (int trial = 0; trial < 25; ++trial) {
    CppnGenome g = random_genome(registry, rng, 8);
    for (int q = 0; q < 10; ++q) {
      std::vector<double> in{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                             rng.uniform(-1.0, 1.0)};
      std::vector<double> got = activate(g, in);
      std::vector<double> want = oracles::eval_cppn(g, in);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE(
    "activation functions compute their definitions and clamp huge inputs") {
  CHECK(apply_activation(ActivationFunction::kSine, 0.5) == doctest::Approx(std::sin(0.5)));
  CHECK(apply_activation(ActivationFunction::kNegSine, 0.5) ==
        doctest::Approx(-std::sin(0.5)));
  CHECK(apply_activation(ActivationFunction::kAbs, -0.7) == doctest::Approx(0.7));
  CHECK(apply_activation(ActivationFunction::kNegAbs, -0.7) == doctest::Approx(-0.7));
  CHECK(apply_activation(ActivationFunction::kSquare, -3.0) == doctest::Approx(9.0));
  CHECK(apply_activation(ActivationFunction::kNegSquare, 3.0) == doctest::Approx(-9.0));
  CHECK(apply_activation(ActivationFunction::kSqrtAbs, -4.0) == doctest::Approx(2.0));
  CHECK(apply_activation(ActivationFunction::kNegSqrtAbs, 4.0) == doctest::Approx(-2.0));
  CHECK(apply_activation(ActivationFunction::kSigmoid, 0.0) == doctest::Approx(0.5));
  CHECK(apply_activation(ActivationFunction::kRelu, -1.0) == 0.0);
  CHECK(apply_activation(ActivationFunction::kRelu, 2.5) == 2.5);
  // Clamped square stays finite.
  CHECK(std::isfinite(apply_activation(ActivationFunction::kSquare, 1e300)));
  CHECK(apply_activation(ActivationFunction::kSquare, 1e300) == doctest::Approx(1e12));
  // ReLU is reserved for the substrate.
  for (ActivationFunction f : cppn_activation_set()) CHECK(f != ActivationFunction::kRelu);
  CHECK(cppn_activation_set().size() == 9);
}

TEST_CASE("activation names round-trip") {
  for (ActivationFunction f : cppn_activation_set()) {
    CHECK(activation_from_name(activation_name(f)) == f);
  }
  CHECK_THROWS(activation_from_name("no_such_fn"));
}

TEST_CASE("mutation preserves feed-forwardness and io nodes") {
  InnovationRegistry registry;
  RandomSource rng(3);
  NeatParams params;
  CppnGenome g = make_initial_genome(3, 2, registry, rng);
  for (int i = 0; i < 2000; ++i) {
    if (i % 40 == 0) registry.begin_generation();
    g = mutate(g, params, registry, rng);
    REQUIRE(is_feed_forward(g));
    for (int id = 0; id < 5; ++id) REQUIRE(g.find_node(id) != nullptr);
  }
  // Topology must have actually moved at some point.
  CHECK(g.serial > 1000);
}

TEST_CASE("node splits reuse innovation numbers within a generation") {
  InnovationRegistry registry;
  RandomSource rng(4);
  CppnGenome g = make_initial_genome(3, 2, registry, rng);
  const ConnectionGene target = g.connections[2];

  auto a = registry.node_split(target.innovation, target.source, target.target);
  auto b = registry.node_split(target.innovation, target.source, target.target);
  CHECK(a.node_id == b.node_id);
  CHECK(a.in_innovation == b.in_innovation);
  CHECK(a.out_innovation == b.out_innovation);
  CHECK(a.node_id >= 5);  // io ids are reserved

  registry.begin_generation();
  auto c = registry.node_split(target.innovation, target.source, target.target);
  CHECK(c.node_id != a.node_id);

  // Same for plain connection innovations.
  registry.begin_generation();
  std::int64_t x = registry.connection_innovation(0, 4);
  std::int64_t y = registry.connection_innovation(0, 4);
  CHECK(x == y);
  registry.begin_generation();
  CHECK(registry.connection_innovation(0, 4) != x);
}

TEST_CASE("crossover aligns genes by innovation and keeps fitter structure") {
  InnovationRegistry registry;
  RandomSource rng(5);
  NeatParams params;
  CppnGenome p1 = make_initial_genome(3, 2, registry, rng);
  CppnGenome p2 = p1;
  p2.serial = registry.next_genome_serial();

  // Diverge: p1 grows a node, p2 only changes weights.
  registry.begin_generation();
  for (int i = 0; i < 50 && p1.hidden_count() == 0; ++i) {
    p1 = mutate(p1, params, registry, rng);
  }
  REQUIRE(p1.hidden_count() > 0);
  for (auto& c : p2.connections) c.weight = 9.0;

  for (int trial = 0; trial < 20; ++trial) {
    CppnGenome child = crossover(p1, p2, registry, rng);
    // Structure equals the fitter parent's.
    REQUIRE(child.nodes.size() == p1.nodes.size());
    REQUIRE(child.connections.size() == p1.connections.size());
    for (std::size_t i = 0; i < child.connections.size(); ++i) {
      const ConnectionGene& c = child.connections[i];
      CHECK(c.innovation == p1.connections[i].innovation);
      const ConnectionGene* in_p2 = p2.find_connection(c.innovation);
      if (in_p2 == nullptr) {
        // Disjoint/excess genes come verbatim from the fitter parent.
        CHECK(c.weight == p1.connections[i].weight);
      } else {
        CHECK((c.weight == p1.connections[i].weight || c.weight == in_p2->weight));
      }
    }
    CHECK(is_feed_forward(child));
  }

  // Matching genes draw from both parents somewhere across trials.
  bool saw_p2_weight = false;
  for (int trial = 0; trial < 30 && !saw_p2_weight; ++trial) {
    CppnGenome child = crossover(p1, p2, registry, rng);
    for (const auto& c : child.connections) {
      if (c.weight == 9.0) saw_p2_weight = true;
    }
  }
  CHECK(saw_p2_weight);
}

TEST_CASE("distance: identity, symmetry, and oracle agreement") {
  InnovationRegistry registry;
  RandomSource rng(6);
  NeatParams params;
  for (int trial = 0; trial < 100; ++trial) {
    CppnGenome a = random_genome(registry, rng, 6);
    CppnGenome b = random_genome(registry, rng, 6);
    CHECK(distance(a, a, params) == 0.0);
    CHECK(distance(b, b, params) == 0.0);
    double ab = distance(a, b, params);
    double ba = distance(b, a, params);
    CHECK(ab == ba);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(oracles::distance_oracle(a, b, params)).epsilon(1e-12));
  }
}

TEST_CASE("distance hand example: one extra gene and one weight delta") {
  InnovationRegistry registry;
  RandomSource rng(7);
  NeatParams params;  // disjoint 1.0, weight 0.5
  CppnGenome a = make_initial_genome(2, 1, registry, rng);
  REQUIRE(a.connections.size() == 2);
  CppnGenome b = a;
  b.connections[0].weight = a.connections[0].weight + 0.8;

  // Same structure (5 genes < 20 so N = 1), mean |dw| = 0.4 over 2 matching.
  CHECK(distance(a, b, params) == doctest::Approx(0.5 * 0.4).epsilon(1e-12));

  // Add an extra connection gene to b only: one unmatched gene.
  ConnectionGene extra;
  extra.innovation = 777;
  extra.source = 0;
  extra.target = 2;
  extra.weight = 0.25;
  b.connections.push_back(extra);
  CHECK(distance(a, b, params) == doctest::Approx(1.0 * 1.0 + 0.5 * 0.4).epsilon(1e-12));

  // Differing activation on a matching node adds 1 to the weight term.
  b.nodes.back().activation = b.nodes.back().activation == ActivationFunction::kSine
                                  ? ActivationFunction::kAbs
                                  : ActivationFunction::kSine;
  CHECK(distance(a, b, params) ==
        doctest::Approx(1.0 * 1.0 + 0.5 * (1.0 + 0.4)).epsilon(1e-12));
}

TEST_CASE("is_feed_forward rejects cycles and dangling endpoints") {
  InnovationRegistry registry;
  RandomSource rng(8);
  CppnGenome g = make_initial_genome(2, 1, registry, rng);
  CHECK(is_feed_forward(g));

  CppnGenome cyclic = g;
  cyclic.nodes.push_back({10, NodeKind::kHidden, ActivationFunction::kSine, 0.0});
  cyclic.nodes.push_back({11, NodeKind::kHidden, ActivationFunction::kSine, 0.0});
  cyclic.connections.push_back({100, 10, 11, 1.0, true});
  cyclic.connections.push_back({101, 11, 10, 1.0, true});
  CHECK_FALSE(is_feed_forward(cyclic));

  CppnGenome dangling = g;
  dangling.connections.push_back({102, 0, 99, 1.0, true});
  CHECK_FALSE(is_feed_forward(dangling));

  CppnGenome self_loop = g;
  self_loop.connections.push_back({103, 2, 2, 1.0, true});
  CHECK_FALSE(is_feed_forward(self_loop));
}

TEST_CASE("genome JSON round-trips exactly") {
  InnovationRegistry registry;
  RandomSource rng(9);
  CppnGenome g = random_genome(registry, rng, 10);
  CppnGenome back = genome_from_json(genome_to_json(g));
  CHECK(back.serial == g.serial);
  CHECK(back.input_count == g.input_count);
  CHECK(back.output_count == g.output_count);
  REQUIRE(back.nodes.size() == g.nodes.size());
  REQUIRE(back.connections.size() == g.connections.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(back.nodes[i].id == g.nodes[i].id);
    CHECK(back.nodes[i].kind == g.nodes[i].kind);
    CHECK(back.nodes[i].activation == g.nodes[i].activation);
    CHECK(back.nodes[i].bias == g.nodes[i].bias);
  }
  for (std::size_t i = 0; i < g.connections.size(); ++i) {
    CHECK(back.connections[i].innovation == g.connections[i].innovation);
    CHECK(back.connections[i].source == g.connections[i].source);
    CHECK(back.connections[i].target == g.connections[i].target);
    CHECK(back.connections[i].weight == g.connections[i].weight);
    CHECK(back.connections[i].enabled == g.connections[i].enabled);
  }
}

TEST_CASE("neat params validate and round-trip") {
  NeatParams p;
  CHECK_NOTHROW(p.validate());
  NeatParams back = neat_params_from_json(neat_params_to_json(p));
  CHECK(back.population_size == p.population_size);
  CHECK(back.compatibility_threshold == p.compatibility_threshold);
  CHECK(back.survival_threshold == p.survival_threshold);

  NeatParams bad = p;
  bad.population_size = 1;
  CHECK_THROWS(bad.validate());
  bad = p;
  bad.survival_threshold = 1.5;
  CHECK_THROWS(bad.validate());
}
