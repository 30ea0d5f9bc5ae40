#include "lorentzfk/harness/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lorentzfk/error.hpp"
#include "lorentzfk/mw_verifier.hpp"

namespace lfk::harness {
namespace {

struct Instance {
  std::string name;
  std::vector<std::uint32_t> volume;
  std::vector<std::uint32_t> window;
  std::vector<std::uint32_t> wide_window;  // for the compatibility checks
};

Instance instance(const std::string& name) {
  if (name == "single") return {name, {0}, {0}, {}};
  if (name == "pair") return {name, {0, 1}, {0}, {0, 1}};
  if (name == "triple") return {name, {0, 1, 2}, {0}, {0, 1}};
  fail(ErrorCode::ConfigInvalid, "unknown oracle instance '" + name + "'");
}

std::vector<std::size_t> spaced(std::size_t count, std::size_t grid) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(k * grid / count);
  return out;
}

}  // namespace

std::vector<OracleComparison> run_oracle_suite(const InteractionSpec& spec, const OracleSuiteParams& params) {
  const auto tri = tree_to_triangulation(RootedPlanarTree(std::vector<std::uint32_t>{1, 1, 1, 1, 0}));
  const DistanceOracle geometry(tri);
  const std::size_t G = params.grid.grid;
  std::vector<OracleComparison> out;
  std::uint64_t index = 0;
  for (const auto& name : params.instances) {
    const Instance inst = instance(name);
    OracleComparison cmp;
    cmp.instance = name;
    cmp.volume = inst.volume.size();
    const auto coupling = coupling_constant(geometry, spec.j(), inst.volume);
    const double c_eff = coupling.value + coupling.tail_bound;
    const ExactProblem problem{inst.volume, inst.window, {}};
    const auto exact = brute_force_rdmk(problem, geometry, spec, params.grid, ExactEngine::Auto, c_eff);
    cmp.trace = exact.trace().value_or(std::numeric_limits<double>::quiet_NaN());
    cmp.min_eigenvalue = exact.smallest_eigenvalue().value_or(std::numeric_limits<double>::quiet_NaN());
    cmp.violations_exact = exact.bound_violations;
    cmp.uniform_bound = exact.uniform_bound;
    for (std::size_t a = 0; a < G; ++a)
      for (std::size_t b = 0; b < G; ++b)
        cmp.symmetry = std::max(cmp.symmetry, std::abs(*exact.value_at(a, b) - *exact.value_at(b, a)));

    // Monte Carlo on evenly spaced points.
    const auto pts = spaced(params.eval_points, G);
    std::vector<WindowPoint> xs;
    for (auto g : pts) xs.push_back({grid_point({g}, G)});
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = 0; b < pts.size(); ++b) pairs.emplace_back(a, b);
    Stream init = Stream::derive(params.seed, "oracle-init", index);
    GibbsSampler chain(geometry, spec,
                       LoopConfiguration::sample_free(inst.volume, params.grid.beta, params.grid.slices, 1, init),
                       Stream::derive(params.seed, "oracle-chain", index));
    McRdmkParams mp = params.mc;
    mp.grid = G;
    mp.coupling = c_eff;
    const auto mc = estimate_rdmk_mc(chain, inst.window, xs, xs, pairs, mp);
    cmp.violations_mc = mc.bound_violations;
    cmp.acceptance_rate = chain.stats().rate();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double e = *exact.value_at(pts[pairs[p].first], pts[pairs[p].second]);
      const double dev = std::abs(mc.values[p] - e);
      cmp.max_abs_dev = std::max(cmp.max_abs_dev, dev);
      cmp.max_rel_dev = std::max(cmp.max_rel_dev, dev / std::abs(e));
      // Rounding floor: with no exterior the estimator is exact and its batch
      // spread is pure floating-point noise.
      const double sigma = std::max(mc.std_errors[p], 1e-12 * std::abs(e));
      cmp.max_z = std::max(cmp.max_z, dev / sigma);
    }

    FkdlrParams fp;
    fp.grid = params.grid;
    Stream frng = Stream::derive(params.seed, "oracle-fkdlr", index);
    cmp.fkdlr = fkdlr_residual(problem, inst.window, geometry, spec, fp, frng);

    cmp.compat_exact = std::numeric_limits<double>::quiet_NaN();
    if (!inst.wide_window.empty()) {
      const ExactProblem wide{inst.volume, inst.wide_window, {}};
      const auto fine = brute_force_rdmk(wide, geometry, spec, params.grid, ExactEngine::Auto, c_eff);
      cmp.compat_exact = compatibility_check(fine, exact).max_deviation;
      cmp.violations_exact += fine.bound_violations;

      // Traced Monte Carlo: (x, z) -> (y, z) over every z of the extra vertex.
      const auto coarse_pts = spaced(params.compat_points, G);
      std::vector<WindowPoint> fx;
      for (auto a : coarse_pts)
        for (std::size_t z = 0; z < G; ++z) fx.push_back({grid_point({a}, G), grid_point({z}, G)});
      std::vector<std::pair<std::size_t, std::size_t>> fpairs;
      for (std::size_t a = 0; a < coarse_pts.size(); ++a)
        for (std::size_t b = 0; b < coarse_pts.size(); ++b)
          for (std::size_t z = 0; z < G; ++z) fpairs.emplace_back(a * G + z, b * G + z);
      Stream init2 = Stream::derive(params.seed, "oracle-init-wide", index);
      GibbsSampler chain2(geometry, spec,
                          LoopConfiguration::sample_free(inst.volume, params.grid.beta, params.grid.slices, 1, init2),
                          Stream::derive(params.seed, "oracle-chain-wide", index));
      McRdmkParams mp2 = mp;
      mp2.inner_samples = params.compat_inner_samples;
      const auto fine_mc = estimate_rdmk_mc(chain2, inst.wide_window, fx, fx, fpairs, mp2);
      cmp.violations_mc += fine_mc.bound_violations;
      const auto rep = compatibility_check(fine_mc, exact);
      cmp.compat_mc_dev = rep.max_deviation;
      cmp.compat_mc_sigma = rep.max_sigma;
    }
    cmp.pass = cmp.max_z < params.sigma_limit && cmp.max_rel_dev < params.relative_limit && cmp.fkdlr < 1e-9 &&
               (std::isnan(cmp.compat_exact) || cmp.compat_exact < 1e-8) && cmp.compat_mc_sigma < params.sigma_limit &&
               std::abs(cmp.trace - 1.0) < 1e-9 && cmp.min_eigenvalue >= -1e-8 && cmp.violations_exact == 0 &&
               cmp.violations_mc == 0;
    out.push_back(cmp);
    ++index;
  }
  return out;
}

}  // namespace lfk::harness
