#include <gtest/gtest.h>

#include <cmath>

#include "lorentzfk/cdlt_graph.hpp"
#include "lorentzfk/decay.hpp"
#include "lorentzfk/error.hpp"
#include "oracles.hpp"

using namespace lfk;
using lfk::testing::chain_triangulation;

TEST(Triangulation, ChainStripsHaveOneUpOneDown) {
  const auto tri = chain_triangulation(2);
  for (std::uint32_t l = 0; l < 2; ++l) EXPECT_EQ(tri.strip_triangles(l).size(), 2u);
  // Every level of a chain carries a self-loop circle edge.
  std::size_t loops = 0;
  for (const auto& e : tri.edges())
    if (e.a == e.b && e.tag == EdgeTag::Circle) ++loops;
  EXPECT_EQ(loops, 3u);
}

TEST(Triangulation, RootWithTwoChildren) {
  const auto tri = tree_to_triangulation(RootedPlanarTree({2, 0, 0}));
  EXPECT_EQ(tri.strip_triangles(0).size(), 3u);
  EXPECT_EQ(tri.layer_sizes(), (std::vector<std::uint64_t>{1, 2}));
}

TEST(Triangulation, HandBuiltTwoLevelFans) {
  // k = [1, 2]: two parallel circle edges on level 1, the root self-loop, a
  // tree edge from each child to the root and one extra fan edge closing the
  // strip. Either child may carry the fan edge.
  for (int wiring = 0; wiring < 2; ++wiring) {
    std::vector<Edge> edges{{0, 0, EdgeTag::Circle}, {1, 2, EdgeTag::Circle}, {2, 1, EdgeTag::Circle}};
    edges.push_back({1, 0, EdgeTag::Tree});
    edges.push_back({2, 0, EdgeTag::Tree});
    edges.push_back({wiring == 0 ? 2u : 1u, 0, EdgeTag::Fan});
    const auto tri = Triangulation::from_parts({{0}, {1, 2}}, edges);
    EXPECT_EQ(triangulation_to_tree(tri), RootedPlanarTree({2, 0, 0}));
  }
}

TEST(Triangulation, RejectsNonTriangulations) {
  // Level-1 vertex with no downward edge.
  std::vector<Edge> edges{{0, 0, EdgeTag::Circle}, {1, 2, EdgeTag::Circle}, {2, 1, EdgeTag::Circle},
                          {0, 1, EdgeTag::Tree}};
  EXPECT_THROW(Triangulation::from_parts({{0}, {1, 2}}, edges), Error);
}

TEST(Triangulation, ChainRoundtrip) {
  const RootedPlanarTree t({1, 1, 1, 1, 0});
  EXPECT_EQ(triangulation_to_tree(tree_to_triangulation(t)), t);
}

TEST(DistanceOracle, MatchesFloydWarshall) {
  Stream rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const auto tri = tree_to_triangulation(sample_sb_tree(OffspringDistribution::geometric(), 6, rng));
    const DistanceOracle oracle(tri);
    const auto fw = lfk::testing::floyd_warshall(tri);
    for (std::uint32_t i = 0; i < tri.vertex_count(); ++i)
      for (std::uint32_t j = 0; j < tri.vertex_count(); ++j) ASSERT_EQ(oracle.distance(i, j), fw[i][j]);
  }
}

TEST(DistanceOracle, ChainDistancesAreHeights) {
  const DistanceOracle oracle(chain_triangulation(10));
  for (std::uint32_t m = 0; m <= 10; ++m) EXPECT_EQ(oracle.distance(oracle.root(), m), m);
  EXPECT_THROW(oracle.distance(0, 11), Error);
}

TEST(Growth, ConstantLayers) {
  const std::vector<std::uint64_t> layers(101, 1);
  EXPECT_NEAR(growth_constant(layers, 0.25), 1.0 / (2.0 * std::pow(std::log(2.0), 0.75)), 1e-15);
}

TEST(Growth, LinearLayersPeakAtTwo) {
  std::vector<std::uint64_t> layers(1000);
  for (std::size_t i = 0; i < layers.size(); ++i) layers[i] = std::max<std::uint64_t>(1, i);
  EXPECT_NEAR(growth_constant(layers, 0.25), 1.0 / std::pow(std::log(2.0), 0.75), 1e-15);
  std::vector<std::uint64_t> doubled = layers;
  for (auto& k : doubled) k *= 2;
  EXPECT_NEAR(growth_constant(doubled, 0.25), 2.0 * growth_constant(layers, 0.25), 1e-14);
}

TEST(Growth, Errors) {
  EXPECT_THROW(growth_constant(std::vector<std::uint64_t>{}, 0.25), Error);
  EXPECT_DOUBLE_EQ(growth_constant(std::vector<std::uint64_t>{1, 3}, 0.25), 0.0);
}

TEST(JLayerSum, ZeroDecay) {
  const std::vector<std::uint64_t> layers(50, 1);
  const auto s = j_layer_sum(layers, Decay::zero());
  EXPECT_EQ(s.value, 0.0);
  EXPECT_EQ(s.tail_bound, 0.0);
}

TEST(JLayerSum, UnitLayersTailCoversLongerSum) {
  const Decay j = Decay::log_cubed();
  const std::vector<std::uint64_t> short_layers(101, 1), long_layers(100001, 1);
  const auto a = j_layer_sum(short_layers, j, [](double) { return 1.0; });
  const auto b = j_layer_sum(long_layers, j, [](double) { return 1.0; });
  // Partial sums converge and the reported tail covers the difference.
  EXPECT_GE(b.value, a.value);
  EXPECT_LE(b.value - a.value, a.tail_bound);
  // The tail is at least the integral of the majorant beyond N (J is decreasing).
  double integral = 0.0;
  for (double x = 100.0; x < 1e6; x += 1.0) integral += std::pow(1.0 / ((x + 0.5) * std::log(x + 0.5)), 3);
  EXPECT_GE(a.tail_bound, 0.5 * integral);
}

TEST(JLayerSum, GrowthLayersConverge) {
  const Decay j = Decay::log_cubed();
  std::vector<std::uint64_t> layers(2001);
  layers[0] = 1;
  for (std::size_t i = 1; i < layers.size(); ++i)
    layers[i] = static_cast<std::uint64_t>(std::ceil(3.0 * i * std::pow(std::log(std::max(2.0, double(i))), 0.75)));
  const auto s = j_layer_sum(layers, j);
  EXPECT_TRUE(std::isfinite(s.value));
  EXPECT_TRUE(std::isfinite(s.tail_bound));
  EXPECT_LT(s.tail_bound, 1e-3);
}

TEST(Coupling, ZeroDecay) {
  const DistanceOracle oracle(chain_triangulation(3));
  EXPECT_EQ(coupling_constant(oracle, Decay::zero()).value, 0.0);
}

TEST(Coupling, SingleStrip) {
  // k = [1, 1] with J(1) = 1: the raw coupling sum is 1 and the constant
  // reports twice it.
  const DistanceOracle oracle(chain_triangulation(1));
  const auto c = coupling_constant(oracle, Decay::nearest_neighbour(1.0));
  EXPECT_DOUBLE_EQ(c.value, 2.0);
  EXPECT_EQ(c.tail_bound, 0.0);
}

TEST(Coupling, ChainMatchesDoubleSum) {
  const auto tri = chain_triangulation(40);
  const DistanceOracle oracle(tri);
  const Decay j = Decay::log_cubed();
  const auto fw = lfk::testing::floyd_warshall(tri);
  double best = 0.0;
  for (std::size_t a = 0; a < fw.size(); ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < fw.size(); ++b)
      if (a != b) s += j(fw[a][b]);
    best = std::max(best, s);
  }
  const auto c = coupling_constant(oracle, j);
  EXPECT_NEAR(c.value, 2.0 * best, 1e-13);
  EXPECT_GT(c.tail_bound, 0.0);
}
