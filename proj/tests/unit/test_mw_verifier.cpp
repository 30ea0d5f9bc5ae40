#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "lorentzfk/error.hpp"
#include "lorentzfk/exact.hpp"
#include "lorentzfk/mw_verifier.hpp"
#include "oracles.hpp"
#include "stats.hpp"

using namespace lfk;
using lfk::testing::chain_triangulation;

namespace {

TunedSchedule schedule(double theta, std::uint32_t n, std::uint32_t r_bar, std::uint32_t n_prime) {
  TunedSchedule s;
  s.g = GroupElement::translation({theta});
  s.n = n;
  s.r_bar = r_bar;
  s.n_prime = n_prime;
  return s;
}

// Profile from the closed forms: z = 1 on (0, 2], 1/(u ln u) beyond; Q its
// integral from 0.
double oracle_q(double b) { return b <= 2.0 ? b : 2.0 + std::log(std::log(b) / std::log(2.0)); }
double oracle_gamma(double k, double r_bar, double n_prime) {
  if (k <= r_bar) return 1.0;
  if (k >= n_prime) return 0.0;
  return 1.0 - oracle_q(k - r_bar) / oracle_q(n_prime - r_bar);
}

InteractionSpec difference_spec(double v) {
  return InteractionSpec(1, PotentialU::zero(), PotentialV::cosine_difference(v, {1}), Decay::log_cubed());
}

}  // namespace

TEST(Profile, ZFunction) {
  EXPECT_DOUBLE_EQ(z_fn(1.0), 1.0);
  EXPECT_DOUBLE_EQ(z_fn(2.0), 1.0);
  EXPECT_NEAR(z_fn(std::exp(2.0)), 1.0 / (2.0 * std::exp(2.0)), 1e-15);
  EXPECT_NEAR(z_fn(std::nextafter(2.0, 3.0)), 1.0 / (2.0 * std::log(2.0)), 1e-12);
}

TEST(Profile, QFunction) {
  EXPECT_DOUBLE_EQ(big_q(2.0), 2.0);
  EXPECT_NEAR(big_q(4.0), 2.0 + std::numbers::ln2, 1e-12);
  EXPECT_NEAR(big_q(1e6), 2.0 + std::log(std::log(1e6) / std::numbers::ln2), 1e-12);
  EXPECT_NEAR(big_q(1e6), 4.9923, 1e-3);
  double prev = 0.0;
  for (double b = 0.5; b < 1e5; b *= 1.7) {
    EXPECT_GT(big_q(b), prev);
    prev = big_q(b);
  }
  EXPECT_THROW(big_q(0.0), Error);
}

TEST(Profile, ThetaFunction) {
  EXPECT_DOUBLE_EQ(theta_fn(-1.0, 5.0), 1.0);
  EXPECT_DOUBLE_EQ(theta_fn(5.0, 5.0), 0.0);
  EXPECT_NEAR(theta_fn(1.0, 4.0), (1.0 + std::numbers::ln2) / (2.0 + std::numbers::ln2), 1e-12);
  EXPECT_THROW(theta_fn(1.0, -1.0), Error);
}

TEST(Profile, GammaShape) {
  const auto s = schedule(0.1, 1, 8, 40);
  for (std::int64_t k = -2; k <= 8; ++k) EXPECT_DOUBLE_EQ(gamma_profile(s, k), 1.0);
  for (std::int64_t k = 40; k < 50; ++k) EXPECT_DOUBLE_EQ(gamma_profile(s, k), 0.0);
  for (std::int64_t k = 8; k < 40; ++k) {
    EXPECT_GE(gamma_profile(s, k), gamma_profile(s, k + 1));
    EXPECT_NEAR(gamma_profile(s, k), oracle_gamma(double(k), 8, 40), 1e-14);
  }
}

TEST(Schedule, Validation) {
  EXPECT_THROW(schedule(0.1, 3, 3, 10).validate(), Error);
  EXPECT_THROW(schedule(0.1, 1, 10, 10).validate(), Error);
  EXPECT_NO_THROW(schedule(0.1, 1, 2, 10).validate());
}

TEST(TunedAction, MultipliersOnChain) {
  const DistanceOracle geometry(chain_triangulation(30));
  const auto s = schedule(0.2, 1, 4, 20);
  const auto m = vertex_multipliers(s, geometry);
  EXPECT_DOUBLE_EQ(m[geometry.root()], 1.0);
  for (std::uint32_t v = 0; v <= 30; ++v) EXPECT_NEAR(m[v], oracle_gamma(v, 4, 20), 1e-14);
  const auto action = build_tuned_action(s, geometry);
  EXPECT_NEAR(action[0].theta()[0], 0.2, 1e-15);
  EXPECT_TRUE(build_tuned_action(schedule(0.0, 1, 4, 20), geometry)[3].is_identity());
}

TEST(TunedAction, ApplyAndInvert) {
  const DistanceOracle geometry(chain_triangulation(10));
  const auto s = schedule(0.3, 1, 2, 8);
  const auto m = vertex_multipliers(s, geometry);
  Stream rng(1);
  const auto config = LoopConfiguration::sample_free({0, 3, 5, 9}, 1.0, 4, 1, rng);
  const auto moved = apply_tuned(s.g, m, config);
  EXPECT_EQ(moved.at(9), config.at(9));  // gamma = 0 beyond n'
  EXPECT_NE(moved.at(0), config.at(0));
  const auto back = apply_tuned(s.g, m, moved, true);
  for (auto v : config.vertices())
    for (std::size_t k = 0; k < config.at(v).words().size(); ++k)
      EXPECT_LE(std::abs(signed_delta(back.at(v).words()[k], config.at(v).words()[k])), 1e-15);
}

TEST(Taylor, EqualMultipliersGiveZero) {
  Stream rng(2);
  const auto spec = difference_spec(1.0);
  const auto a = sample_loop(TorusPoint::from_coords(std::vector<double>{0.2}), 1.0, 8, rng);
  const auto b = sample_loop(TorusPoint::from_coords(std::vector<double>{0.6}), 1.0, 8, rng);
  EXPECT_EQ(taylor_gap(spec, a, b, 1.0, 1.0, GroupElement::translation({0.3})).gap, 0.0);
  EXPECT_EQ(taylor_gap(spec, a, b, 0.4, 0.4, GroupElement::translation({0.3})).gap, 0.0);
}

TEST(Taylor, QuadraticScaling) {
  Stream rng(3);
  const auto spec = difference_spec(1.0);
  std::vector<double> logt, logg;
  const auto a = sample_loop(TorusPoint::from_coords(std::vector<double>{0.2}), 1.0, 8, rng);
  const auto b = sample_loop(TorusPoint::from_coords(std::vector<double>{0.45}), 1.0, 8, rng);
  for (double t : {0.2, 0.1, 0.05, 0.025}) {
    logt.push_back(std::log(t));
    logg.push_back(std::log(std::abs(taylor_gap(spec, a, b, 1.0, 0.3, GroupElement::translation({t})).gap)));
  }
  EXPECT_NEAR(lfk::testing::ls_slope(logt, logg), 2.0, 0.1);
}

TEST(Taylor, FittedConstantStableAndBelowAnalytic) {
  Stream rng(4);
  const auto spec = difference_spec(0.5);
  const auto fit = fit_taylor_constant(spec, GroupElement::translation({0.1}), 1.0, 8, 1000, rng);
  EXPECT_EQ(fit.pairs, 1000u);
  EXPECT_GT(fit.constant, 0.0);
  EXPECT_LE(fit.constant, *analytic_taylor_constant(spec) + 1e-12);
  EXPECT_NEAR(fit.first_half, fit.second_half, 0.25 * fit.constant);
  const InteractionSpec custom(1, PotentialU::zero(),
                               PotentialV::custom("c", [](std::span<const double> x, std::span<const double> y) {
                                 return std::cos(2 * std::numbers::pi * (x[0] - y[0]));
                               }),
                               Decay::zero());
  EXPECT_FALSE(analytic_taylor_constant(custom).has_value());
}

TEST(Phi, ZeroCases) {
  const DistanceOracle geometry(chain_triangulation(20));
  EXPECT_EQ(phi_series(schedule(0.0, 1, 4, 10), geometry, Decay::log_cubed()).value, 0.0);
  const DistanceOracle short_chain(chain_triangulation(3));
  const auto p = phi_certificate(schedule(0.2, 1, 4, 10), short_chain, Decay::nearest_neighbour(1.0));
  EXPECT_EQ(p.value, 0.0);
}

TEST(Phi, ChainMatchesDoubleSum) {
  const auto tri = chain_triangulation(24);
  const DistanceOracle geometry(tri);
  const auto fw = lfk::testing::floyd_warshall(tri);
  const Decay j = Decay::log_cubed();
  const auto s = schedule(0.3, 1, 2, 6);
  double window_sum = 0.0, full_sum = 0.0;
  for (std::size_t a = 0; a < fw.size(); ++a)
    for (std::size_t b = 0; b < fw.size(); ++b) {
      if (a == b) continue;
      const double dg = oracle_gamma(double(a), 2, 6) - oracle_gamma(double(b), 2, 6);
      const double term = 0.09 * j(fw[a][b]) * dg * dg;
      full_sum += term;
      if (a <= 1) window_sum += term;
    }
  EXPECT_NEAR(phi_series(s, geometry, j).value, window_sum, 1e-12);
  EXPECT_NEAR(phi_double_sum(s, geometry, j), window_sum, 1e-12);
  EXPECT_NEAR(phi_certificate(s, geometry, j).value, full_sum, 1e-12);
}

TEST(Phi, TailCoversShorterGeometry) {
  const Decay j = Decay::log_cubed();
  const auto s = schedule(0.1, 1, 4, 16);
  const auto small = phi_certificate(s, DistanceOracle(chain_triangulation(20)), j);
  const auto big = phi_certificate(s, DistanceOracle(chain_triangulation(200)), j);
  EXPECT_GE(big.value, small.value);
  EXPECT_LE(big.value - small.value, small.tail_bound);
}

TEST(Phi, DecayFit) {
  std::vector<std::uint32_t> nps{16, 32, 64, 128, 256};
  std::vector<double> phis;
  for (auto np : nps) phis.push_back(1.0 / big_q(np - 4.0));
  const auto fit = phi_decay_fit(nps, phis, 4);
  EXPECT_NEAR(fit.ratio, 1.0, 1e-12);
  EXPECT_TRUE(fit.bounded);
  const auto zero = phi_decay_fit(nps, std::vector<double>(5, 0.0), 4);
  EXPECT_TRUE(zero.degenerate);
  EXPECT_THROW(phi_decay_fit({16, 32}, {1.0, 1.0}, 4), Error);
}

TEST(Convexity, MarginAndIdentityAction) {
  EXPECT_DOUBLE_EQ(certified_margin(1.1, 3.0, 0.0), 1.1);
  EXPECT_NEAR(certified_margin(1.1, 2.0, 0.5), 1.1 * std::exp(-0.5), 1e-15);
  EXPECT_NEAR(convexity_constant(difference_spec(0.5), 1.0, 1.0), 0.5 * 4 * std::numbers::pi * std::numbers::pi,
              1e-12);
  const DistanceOracle geometry(chain_triangulation(12));
  const auto spec = difference_spec(0.5);
  Stream rng(5);
  std::vector<LoopConfiguration> samples;
  for (int i = 0; i < 20; ++i)
    samples.push_back(LoopConfiguration::sample_free({0, 1, 2, 3, 4, 5, 6, 7}, 1.0, 4, 1, rng));
  const auto rep = convexity_check(samples, {}, schedule(0.0, 1, 2, 6), geometry, spec, 1.1);
  EXPECT_EQ(rep.satisfied, 20u);
  EXPECT_NEAR(rep.min_log_margin, std::log(1.1), 1e-12);
}

TEST(Gap, SymmetricSpecHasNoTransportGap) {
  const DistanceOracle geometry(chain_triangulation(4));
  const auto gaps = invariance_gap(geometry, difference_spec(0.6), 0, {1, 2}, std::nullopt, {12, 3, 1.0}, 3);
  ASSERT_EQ(gaps.size(), 2u);
  for (const auto& g : gaps) {
    EXPECT_LT(g.gap_kernel, 1e-12);
    EXPECT_NEAR(g.trace, 1.0, 1e-9);
  }
}

TEST(Gap, BoundaryBreaksSymmetry) {
  const DistanceOracle geometry(chain_triangulation(6));
  const auto gaps = invariance_gap(geometry, difference_spec(0.6), 0, {1, 2},
                                   TorusPoint::from_coords(std::vector<double>{0.0}), {12, 3, 1.0}, 3);
  EXPECT_GT(gaps[0].gap_kernel, 1e-6);
  EXPECT_GE(gaps[0].gap_kernel, gaps[1].gap_kernel);
}

TEST(Lipschitz, ChainHasNoViolations) {
  const DistanceOracle geometry(chain_triangulation(32));
  const auto rep = lipschitz_check(schedule(0.1, 1, 4, 24), geometry);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_GT(rep.pairs, 0u);
}

TEST(Levels, VertexSelection) {
  const DistanceOracle geometry(tree_to_triangulation(RootedPlanarTree({2, 1, 1, 0, 0})));
  EXPECT_EQ(vertices_up_to(geometry, 1), (std::vector<std::uint32_t>{0, 1, 2}));
  EXPECT_EQ(vertices_on(geometry, 2), (std::vector<std::uint32_t>{3, 4}));
}
