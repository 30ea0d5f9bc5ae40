// Property tests over hand-rolled random generators. Each property draws many
// cases from a seeded stream; failures report the case index.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <queue>

#include "lorentzfk/cdlt_graph.hpp"
#include "lorentzfk/fk_gibbs.hpp"
#include "lorentzfk/interaction.hpp"
#include "lorentzfk/mw_verifier.hpp"
#include "lorentzfk/exact.hpp"
#include "oracles.hpp"

using namespace lfk;

namespace {

constexpr int kCases = 200;

// Random planar tree: level by level, each vertex gets 0..max_children
// children, height capped; at least one child per level until min_height so
// that the tree is not trivially small.
RootedPlanarTree random_tree(Stream& rng, std::uint32_t max_height, std::uint32_t max_children) {
  std::vector<std::uint32_t> counts{0};
  std::size_t begin = 0, end = 1;
  const auto height = static_cast<std::uint32_t>(rng.below(max_height + 1));
  for (std::uint32_t level = 0; level < height && begin < end; ++level) {
    std::size_t next = 0;
    for (std::size_t v = begin; v < end; ++v) {
      counts[v] = static_cast<std::uint32_t>(rng.below(max_children + 1));
      if (v == begin && counts[v] == 0 && rng.uniform() < 0.7) counts[v] = 1;
      next += counts[v];
      if (next > 60) {
        counts[v] -= static_cast<std::uint32_t>(next - 60);
        next = 60;
      }
    }
    counts.resize(end + next, 0);
    begin = end;
    end += next;
  }
  return RootedPlanarTree(counts);
}

TorusPoint random_point(Stream& rng, std::size_t dim) {
  std::vector<double> c(dim);
  for (auto& x : c) x = rng.uniform();
  return TorusPoint::from_coords(c);
}

InteractionSpec random_difference_spec(Stream& rng, std::size_t dim) {
  std::vector<int> mode(dim);
  for (auto& m : mode) m = static_cast<int>(rng.below(3)) - 1;
  if (std::all_of(mode.begin(), mode.end(), [](int m) { return m == 0; })) mode[0] = 1;
  return InteractionSpec(dim, PotentialU::constant(rng.uniform()), PotentialV::cosine_difference(rng.uniform() + 0.1, mode),
                         Decay::log_cubed(0.5 + 0.5 * rng.uniform()));
}

}  // namespace

TEST(Property, TreeTriangulationRoundtrip) {
  Stream rng(101);
  for (int c = 0; c < kCases; ++c) {
    const auto tree = random_tree(rng, 8, 3);
    const auto tri = tree_to_triangulation(tree);
    ASSERT_EQ(triangulation_to_tree(tri), tree) << "case " << c;
    const auto k = tri.layer_sizes();
    for (std::uint32_t l = 0; l + 1 < k.size(); ++l)
      ASSERT_EQ(tri.strip_triangles(l).size(), k[l] + k[l + 1]) << "case " << c << " strip " << l;
  }
}

TEST(Property, DistancesAreAMetricCompatibleWithLevels) {
  Stream rng(102);
  for (int c = 0; c < 60; ++c) {
    const auto tri = tree_to_triangulation(random_tree(rng, 6, 3));
    const DistanceOracle oracle(tri);
    const std::size_t n = tri.vertex_count();
    for (int t = 0; t < 50; ++t) {
      const auto a = static_cast<std::uint32_t>(rng.below(n)), b = static_cast<std::uint32_t>(rng.below(n)),
                 m = static_cast<std::uint32_t>(rng.below(n));
      const auto dab = oracle.distance(a, b);
      ASSERT_NE(dab, DistanceOracle::kUnreachable) << "disconnected, case " << c;
      ASSERT_EQ(dab, oracle.distance(b, a));
      ASSERT_LE(dab, oracle.distance(a, m) + oracle.distance(m, b));
      const auto la = tri.level_of(a), lb = tri.level_of(b);
      ASSERT_GE(dab, la > lb ? la - lb : lb - la);
      ASSERT_EQ(oracle.distance(oracle.root(), a), la);
    }
    for (const auto& e : tri.edges())
      if (e.a != e.b) ASSERT_EQ(oracle.distance(e.a, e.b), 1u);
  }
}

TEST(Property, ChapmanKolmogorov) {
  Stream rng(103);
  const std::size_t grid = 512;
  for (int c = 0; c < 40; ++c) {
    const double s = 0.1 + rng.uniform(), t = 0.1 + rng.uniform();
    const auto x = random_point(rng, 1), y = random_point(rng, 1);
    double conv = 0.0;
    for (std::size_t k = 0; k < grid; ++k) {
      const auto z = TorusPoint::from_coords(std::vector<double>{(k + 0.5) / grid});
      conv += transition_density(x, z, s, 1e-15) * transition_density(z, y, t, 1e-15) / grid;
    }
    ASSERT_NEAR(conv, transition_density(x, y, s + t, 1e-15), 1e-10) << "case " << c;
  }
}

TEST(Property, WordArithmetic) {
  Stream rng(104);
  for (int c = 0; c < 10000; ++c) {
    const Word a = rng(), b = rng();
    ASSERT_EQ(signed_delta(a, b), a - b == Word{1} << 63 ? -0.5 : -signed_delta(b, a));
    const double u = rng.uniform();
    ASSERT_NEAR(word_to_unit(unit_to_word(u)), u, 1e-15);
  }
}

TEST(Property, DifferenceKernelEnergyIsTranslationInvariant) {
  Stream rng(105);
  const DistanceOracle geometry(lfk::testing::chain_triangulation(6));
  for (int c = 0; c < kCases; ++c) {
    const std::size_t dim = 1 + rng.below(2);
    const auto spec = random_difference_spec(rng, dim);
    std::vector<double> theta(dim);
    for (auto& t : theta) t = rng.uniform() - 0.5;
    const auto g = GroupElement::translation(theta);
    const auto config = LoopConfiguration::sample_free({0, 1, 2, 4, 6}, 0.5 + rng.uniform(), 1 + rng.below(6), dim, rng);
    LoopConfiguration moved(config.beta(), config.slices(), dim);
    for (std::size_t i = 0; i < config.size(); ++i) moved.set(config.vertices()[i], apply_group_path(g, config.paths()[i]));
    ASSERT_NEAR(config_energy(moved, geometry, spec).total, config_energy(config, geometry, spec).total, 1e-11)
        << "case " << c;
  }
}

TEST(Property, ConditionalEnergySplitsTotal) {
  Stream rng(106);
  const DistanceOracle geometry(lfk::testing::chain_triangulation(7));
  const InteractionSpec spec(1, PotentialU::cosine(0.6, {1}), PotentialV::cosine_difference(0.8, {2}), Decay::log_cubed());
  for (int c = 0; c < kCases; ++c) {
    const auto config = LoopConfiguration::sample_free({0, 1, 2, 3, 4, 5, 6, 7}, 1.0, 1 + rng.below(5), 1, rng);
    std::vector<std::uint32_t> inner;
    for (auto v : config.vertices())
      if (rng.uniform() < 0.4) inner.push_back(v);
    if (inner.empty()) inner.push_back(0);
    const auto in = config.restricted(inner), out = config.without(inner);
    ASSERT_NEAR(config_energy(config, geometry, spec).total,
                config_energy(out, geometry, spec).total + conditional_energy(in, out, nullptr, geometry, spec), 1e-10)
        << "case " << c;
    ASSERT_EQ(in.merged(out).size(), config.size());
  }
}

TEST(Property, TunedProfileIsMonotoneAndBounded) {
  Stream rng(107);
  for (int c = 0; c < kCases; ++c) {
    TunedSchedule s;
    s.g = GroupElement::translation({rng.uniform()});
    s.n = static_cast<std::uint32_t>(rng.below(4));
    s.r_bar = s.n + 1 + static_cast<std::uint32_t>(rng.below(10));
    s.n_prime = s.r_bar + 1 + static_cast<std::uint32_t>(rng.below(200));
    double prev = 1.0;
    for (std::int64_t k = 0; k <= s.n_prime + 2; ++k) {
      const double g = gamma_profile(s, k);
      ASSERT_GE(g, 0.0);
      ASSERT_LE(g, prev + 1e-15) << "case " << c << " k " << k;
      prev = g;
    }
  }
}

TEST(Property, LipschitzOnRandomTriangulations) {
  Stream rng(108);
  for (int c = 0; c < 15; ++c) {
    const DistanceOracle geometry(tree_to_triangulation(random_tree(rng, 12, 2)));
    TunedSchedule s;
    s.g = GroupElement::translation({0.2});
    s.n = 0;
    s.r_bar = 1 + static_cast<std::uint32_t>(rng.below(3));
    s.n_prime = s.r_bar + 2 + static_cast<std::uint32_t>(rng.below(8));
    ASSERT_EQ(lipschitz_check(s, geometry).violations, 0u) << "case " << c;
  }
}

TEST(Property, KernelTraceAndSymmetry) {
  Stream rng(109);
  const DistanceOracle geometry(lfk::testing::chain_triangulation(3));
  for (int c = 0; c < 10; ++c) {
    const InteractionSpec spec(1, PotentialU::cosine(rng.uniform() - 0.5, {1}),
                               PotentialV::cosine_difference(rng.uniform(), {1}), Decay::nearest_neighbour(1.0));
    const std::size_t grid = 4 + rng.below(5), slices = 1 + rng.below(3);
    std::vector<std::uint32_t> vol{0, 1};
    if (rng.uniform() < 0.5) vol.push_back(2);
    const auto est = brute_force_rdmk({vol, {0}, {}}, geometry, spec, {grid, slices, 0.5 + rng.uniform()});
    ASSERT_NEAR(*est.trace(), 1.0, 1e-10) << "case " << c;
    for (std::size_t x = 0; x < grid; ++x)
      for (std::size_t y = 0; y < grid; ++y) ASSERT_NEAR(*est.value_at(x, y), *est.value_at(y, x), 1e-12);
    ASSERT_GT(*est.smallest_eigenvalue(), -1e-10);
  }
}
