// Acceptance suite: one line per criterion, exit status = number of failures.
#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lorentzfk/cdlt_graph.hpp"
#include "lorentzfk/exact.hpp"
#include "lorentzfk/fk_gibbs.hpp"
#include "lorentzfk/harness/oracle.hpp"
#include "lorentzfk/mw_verifier.hpp"
#include "lorentzfk/torus_kernel.hpp"
#include "oracles.hpp"
#include "stats.hpp"

using namespace lfk;
using lfk::testing::chain_triangulation;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double percentile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

TorusPoint pt(double x) { return TorusPoint::from_coords(std::vector<double>{x}); }

TunedSchedule schedule(double theta, std::uint32_t n, std::uint32_t r_bar, std::uint32_t n_prime) {
  TunedSchedule s;
  s.g = GroupElement::translation({theta});
  s.n = n;
  s.r_bar = r_bar;
  s.n_prime = n_prime;
  return s;
}

// 1. Layer recursion of size-biased trees.
Outcome sb_layer_recursion() {
  struct Law {
    const char* name;
    OffspringDistribution dist;
    double variance;
  };
  const std::vector<Law> laws{{"geometric", OffspringDistribution::geometric(), 2.0},
                              {"binary", OffspringDistribution::binary(), 1.0}};
  const std::vector<std::uint32_t> levels{5, 20, 50};
  const int samples = 100000;
  Outcome out{true, ""};
  for (const auto& law : laws) {
    Stream rng = Stream::derive(2024, law.name);
    std::vector<std::vector<double>> inc(levels.size());
    for (int i = 0; i < samples; ++i) {
      const auto k = layer_sizes(sample_sb_tree(law.dist, 50, rng));
      for (std::size_t l = 0; l < levels.size(); ++l)
        inc[l].push_back(static_cast<double>(k[levels[l]]) - static_cast<double>(k[levels[l] - 1]));
    }
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto m = lfk::testing::mean_se(inc[l]);
      const double z = (m.mean - law.variance) / m.se;
      out.pass = out.pass && std::abs(z) < 3.0;
      out.detail += fmt("%s n=%u: %.4f (z=%+.2f) ", law.name, levels[l], m.mean, z);
    }
  }
  return out;
}

// 2. Exhaustive tree <-> triangulation bijection.
Outcome bijection() {
  std::size_t trees = 0, failures = 0;
  lfk::testing::for_each_tree(4, 2, [&](const std::vector<std::uint32_t>& counts) {
    const RootedPlanarTree tree(counts);
    const auto tri = tree_to_triangulation(tree);
    bool ok = triangulation_to_tree(tri) == tree;
    const auto k = tri.layer_sizes();
    for (std::uint32_t l = 0; l + 1 < k.size(); ++l) ok = ok && tri.strip_triangles(l).size() == k[l] + k[l + 1];
    ++trees;
    if (!ok) ++failures;
  });
  return {failures == 0 && trees > 1000, fmt("%zu trees, %zu failures", trees, failures)};
}

// 3. Growth constant tail stability under doubling the height.
Outcome growth_bound() {
  const auto dist = OffspringDistribution::geometric();
  std::vector<double> p99;
  bool finite = true;
  for (std::uint32_t height : {1000u, 2000u}) {
    Stream rng = Stream::derive(7, "growth", height);
    std::vector<double> c;
    for (int i = 0; i < 1000; ++i) {
      const double g = growth_constant(sample_sb_layers(dist, height, rng), 0.25);
      finite = finite && std::isfinite(g);
      c.push_back(g);
    }
    p99.push_back(percentile(c, 0.99));
  }
  const double change = std::abs(p99[1] - p99[0]) / p99[0];
  return {finite && change < 0.2, fmt("p99 %.4f -> %.4f, change %.2f%%", p99[0], p99[1], 100 * change)};
}

// 4. Heat kernel identities and bridge marginal.
Outcome heat_kernel() {
  const std::size_t grid = 2048;
  double ck = 0.0, norm = 0.0;
  for (double beta : {0.25, 0.5, 1.0, 2.0}) {
    std::vector<double> half(grid), full(grid);
    for (std::size_t k = 0; k < grid; ++k) {
      half[k] = transition_density(pt(0.0), pt(double(k) / grid), beta / 2, 1e-15);
      full[k] = transition_density(pt(0.0), pt(double(k) / grid), beta, 1e-15);
    }
    double mass = 0.0;
    for (double v : full) mass += v / grid;
    norm = std::max(norm, std::abs(mass - 1.0));
    for (std::size_t y = 0; y < grid; y += 64) {
      double conv = 0.0;
      for (std::size_t z = 0; z < grid; ++z) conv += half[z] * half[(y + grid - z) % grid] / grid;
      ck = std::max(ck, std::abs(conv - full[y]));
    }
  }
  const std::size_t bins = 32, n = 100000;
  Stream rng = Stream::derive(4, "bridge");
  std::vector<double> obs(bins, 0.0), expected(bins, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = sample_bridge(pt(0.0), pt(0.0), 1.0, 64, rng);
    obs[std::min(bins - 1, static_cast<std::size_t>(b.point(32).coord(0) * bins))] += 1.0;
  }
  const double p0 = transition_density(pt(0.0), pt(0.0), 1.0, 1e-15);
  for (std::size_t k = 0; k < bins; ++k)
    for (int q = 0; q < 64; ++q) {
      const double z = (k + (q + 0.5) / 64.0) / bins;
      const double h = transition_density(pt(0.0), pt(z), 0.5, 1e-15);
      expected[k] += h * h / p0 / (64.0 * bins) * n;
    }
  const double p = lfk::testing::chi_square_p(obs, expected);
  return {ck < 1e-7 && norm < 1e-8 && p > 0.01, fmt("CK %.2e, normalization %.2e, bridge chi-square p=%.3f", ck, norm, p)};
}

lfk::harness::OracleSuiteParams oracle_params() {
  lfk::harness::OracleSuiteParams params;
  params.grid = {16, 4, 1.0};
  params.seed = 20240601;
  params.mc.samples = 4000;
  params.mc.inner_samples = 64;
  params.mc.batches = 40;
  return params;
}

std::vector<lfk::harness::OracleComparison> oracle_results() {
  const InteractionSpec spec(1, PotentialU::cosine(0.3, {1}), PotentialV::cosine_difference(0.5, {1}),
                             Decay::nearest_neighbour(1.0));
  return lfk::harness::run_oracle_suite(spec, oracle_params());
}

// 5. Brute force versus Monte Carlo on the canned instances.
Outcome oracle_equivalence(const std::vector<lfk::harness::OracleComparison>& results) {
  Outcome out{true, ""};
  for (const auto& r : results) {
    out.pass = out.pass && r.pass;
    out.detail += fmt("%s: z=%.2f rel=%.4f fkdlr=%.1e compat=%.1e/%.2fsig; ", r.instance.c_str(), r.max_z, r.max_rel_dev,
                      r.fkdlr, std::isnan(r.compat_exact) ? 0.0 : r.compat_exact,
                      r.compat_mc_sigma > 0 ? r.compat_mc_dev / r.compat_mc_sigma : 0.0);
  }
  return out;
}

// 6. Uniform bound over every emitted kernel value of the suite.
Outcome uniform_bound(const std::vector<lfk::harness::OracleComparison>& results) {
  std::size_t violations = 0;
  double bound = 0.0;
  for (const auto& r : results) {
    violations += r.violations_exact + r.violations_mc;
    bound = std::max(bound, r.uniform_bound);
  }
  return {violations == 0 && !results.empty(), fmt("%zu violations, largest bound %.4g", violations, bound)};
}

// 7. Profile closed forms and the Lipschitz bound.
Outcome tuned_analytics() {
  const double q4 = big_q(4.0), t14 = theta_fn(1.0, 4.0);
  const double eq = std::abs(q4 - (2.0 + std::numbers::ln2));
  const double et = std::abs(t14 - (1.0 + std::numbers::ln2) / (2.0 + std::numbers::ln2));
  const auto s = schedule(0.1, 1, 8, 64);
  std::size_t violations = lipschitz_check(s, DistanceOracle(chain_triangulation(64))).violations;
  std::size_t pairs = 0;
  for (int i = 0; i < 10; ++i) {
    Stream rng = Stream::derive(77, "lipschitz", i);
    const DistanceOracle geometry(tree_to_triangulation(sample_sb_tree(OffspringDistribution::geometric(), 64, rng)));
    const auto rep = lipschitz_check(s, geometry);
    violations += rep.violations;
    pairs += rep.pairs;
  }
  return {eq < 1e-12 && et < 1e-12 && violations == 0,
          fmt("|Q(4) err| %.1e, |theta(1,4) err| %.1e, %zu SB pairs, %zu violations", eq, et, pairs, violations)};
}

// 8. Phi decay against 1/Q(n' - r_bar).
Outcome phi_decay() {
  const std::vector<std::uint32_t> nps{16, 32, 64, 128, 256, 512, 1024};
  const Decay j = Decay::log_cubed(1.0);
  const std::uint32_t r_bar = 8;
  Outcome out{true, ""};
  auto check = [&](const char* name, const DistanceOracle& geometry) {
    std::vector<double> phis;
    for (auto np : nps) phis.push_back(phi_series(schedule(0.1, 1, r_bar, np), geometry, j).value);
    const auto fit = phi_decay_fit(nps, phis, r_bar);
    out.pass = out.pass && fit.bounded && !fit.degenerate;
    out.detail += fmt("%s ratio %.3f; ", name, fit.ratio);
  };
  check("chain", DistanceOracle(chain_triangulation(1030)));
  for (int i = 0; i < 3; ++i) {
    Stream rng = Stream::derive(88, "phi", i);
    const DistanceOracle geometry(tree_to_triangulation(sample_sb_tree(OffspringDistribution::binary(), 1030, rng)));
    check(("sb" + std::to_string(i)).c_str(), geometry);
  }
  return out;
}

// 9. Convexity inequality at the smallest certified n'.
Outcome convexity() {
  const Decay j = Decay::log_cubed(1.0);
  const InteractionSpec spec(1, PotentialU::zero(), PotentialV::cosine_difference(0.5, {1}), j);
  const double beta = 1.0, a = 1.1;
  const std::uint32_t n = 1, r_bar = 8;
  const double constant = convexity_constant(spec, beta, *analytic_taylor_constant(spec));
  auto chain_for = [](std::uint32_t np) { return chain_triangulation(np + 5); };
  std::uint32_t certified = 0;
  double margin = 0.0;
  for (std::uint32_t np = r_bar + 1; np <= 400 && certified == 0; ++np) {
    const DistanceOracle geometry(chain_for(np));
    const auto phi = phi_certificate(schedule(0.1, n, r_bar, np), geometry, j);
    margin = certified_margin(a, constant, phi.value + phi.tail_bound);
    if (margin > 1.0) certified = np;
  }
  if (certified == 0) return {false, "no certified n' up to 400"};
  auto run = [&](double theta, std::uint32_t np, std::uint64_t seed) {
    const DistanceOracle geometry(chain_for(np));
    const auto volume = vertices_up_to(geometry, np + 5);
    Stream init = Stream::derive(seed, "init");
    GibbsSampler chain(geometry, spec, LoopConfiguration::sample_free(volume, beta, 8, 1, init),
                       Stream::derive(seed, "chain"));
    chain.sweeps(10 * volume.size());
    Stream rng = Stream::derive(seed, "samples");
    const auto samples = sample_window_configurations(chain, vertices_up_to(geometry, n), 10000, 1, rng);
    return convexity_check(samples, {}, schedule(theta, n, r_bar, np), geometry, spec, a);
  };
  const auto main = run(0.1, certified, 9);
  const auto adversarial = run(0.5, r_bar + 1, 10);
  return {main.satisfied == main.samples && main.samples == 10000,
          fmt("n'=%u (margin %.5f): %zu/%zu satisfied, min log margin %.3g; n'=%u |theta|=0.5: %zu violations "
              "(reported only)",
              certified, margin, main.satisfied, main.samples, main.min_log_margin, r_bar + 1,
              adversarial.samples - adversarial.satisfied)};
}

// 10. Kernel-transport invariance gap.
Outcome invariance() {
  const InteractionSpec spec(1, PotentialU::zero(), PotentialV::cosine_difference(0.6, {1}), Decay::nearest_neighbour(1.0));
  const GridParams gp{12, 3, 1.0};
  const std::size_t shift = 3;
  const std::vector<std::uint32_t> levels{2, 3, 4, 5};
  const DistanceOracle geometry(chain_triangulation(8));
  // Symmetric spec: exact kernels at every N, then a Monte Carlo estimate at N = 2.
  double sym = 0.0;
  for (const auto& g : invariance_gap(geometry, spec, 0, levels, std::nullopt, gp, shift)) sym = std::max(sym, g.gap_kernel);
  const auto volume = vertices_up_to(geometry, 2);
  Stream init = Stream::derive(10, "init");
  GibbsSampler chain(geometry, spec, LoopConfiguration::sample_free(volume, 1.0, 3, 1, init), Stream::derive(10, "chain"));
  std::vector<WindowPoint> pts;
  for (std::size_t g = 0; g < 12; ++g) pts.push_back({grid_point({g}, 12)});
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x < 12; x += 3)
    for (std::size_t y = 0; y < 12; ++y) pairs.emplace_back(x, y);
  McRdmkParams mp;
  mp.samples = 2000;
  mp.inner_samples = 32;
  mp.grid = 12;
  const auto mc = kernel_transport_gap(estimate_rdmk_mc(chain, {0}, pts, pts, pairs, mp), shift);
  // Symmetry-breaking boundary spin one level above the volume.
  const auto broken = invariance_gap(geometry, spec, 0, levels, pt(0.0), gp, shift);
  bool monotone = true;
  std::string trail;
  for (std::size_t i = 0; i < broken.size(); ++i) {
    if (i > 0) monotone = monotone && broken[i].gap_kernel <= broken[i - 1].gap_kernel;
    trail += fmt("%s%.3e", i ? " > " : "", broken[i].gap_kernel);
  }
  return {sym < 1e-12 && mc.max_z < 3.0 && monotone && broken.front().gap_kernel > 0.0,
          fmt("symmetric exact gap %.1e, MC max z %.2f over %zu pairs; boundary gaps %s", sym, mc.max_z, mc.compared,
              trail.c_str())};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = body();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %-22s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
  };
  report(1, "sb_layer_recursion", sb_layer_recursion);
  report(2, "bijection", bijection);
  report(3, "growth_bound", growth_bound);
  report(4, "heat_kernel", heat_kernel);
  std::vector<lfk::harness::OracleComparison> results;
  report(5, "oracle_equivalence", [&] {
    results = oracle_results();
    return oracle_equivalence(results);
  });
  report(6, "uniform_bound", [&] { return uniform_bound(results); });
  report(7, "tuned_analytics", tuned_analytics);
  report(8, "phi_decay", phi_decay);
  report(9, "convexity", convexity);
  report(10, "invariance_gap", invariance);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
