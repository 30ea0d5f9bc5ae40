#include "lorentzfk/mw_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

double theta_sq(const GroupElement& g) {
  double s = 0.0;
  for (double x : g.shift()) s += x * x;
  return s;
}

std::uint32_t profile_k(const TunedSchedule& schedule, const DistanceOracle& geometry, std::uint32_t v,
                        const std::vector<std::uint32_t>& root_dist) {
  return schedule.distance == ProfileDistance::Height ? geometry.level_of(v) : root_dist[v];
}

}  // namespace

double z_fn(double u) noexcept { return u <= 2.0 ? 1.0 : 1.0 / (u * std::log(u)); }

double big_q(double b) {
  if (!(b > 0.0)) fail(ErrorCode::NonpositiveB, "Q needs b > 0");
  if (b <= 2.0) return b;
  return 2.0 + std::log(std::log(b)) - std::log(std::numbers::ln2);
}

double theta_fn(double a, double b) {
  if (!(b > 0.0)) fail(ErrorCode::NonpositiveB, "theta needs b > 0");
  if (a <= 0.0) return 1.0;
  if (a >= b) return 0.0;
  return (big_q(b) - big_q(a)) / big_q(b);
}

void TunedSchedule::validate() const {
  if (!(n < r_bar && r_bar < n_prime))
    fail(ErrorCode::ConfigInvalid, "schedule needs n < r_bar < n' (got " + std::to_string(n) + ", " +
                                       std::to_string(r_bar) + ", " + std::to_string(n_prime) + ")");
}

double gamma_profile(const TunedSchedule& schedule, std::int64_t k) {
  if (k <= static_cast<std::int64_t>(schedule.r_bar)) return 1.0;
  if (k >= static_cast<std::int64_t>(schedule.n_prime)) return 0.0;
  return theta_fn(static_cast<double>(k - schedule.r_bar), static_cast<double>(schedule.n_prime - schedule.r_bar));
}

std::vector<double> vertex_multipliers(const TunedSchedule& schedule, const DistanceOracle& geometry) {
  schedule.validate();
  const auto root = geometry.distances_from(geometry.root());
  std::vector<double> out(geometry.vertex_count());
  for (std::uint32_t v = 0; v < out.size(); ++v) out[v] = gamma_profile(schedule, profile_k(schedule, geometry, v, *root));
  return out;
}

std::vector<GroupElement> build_tuned_action(const TunedSchedule& schedule, const DistanceOracle& geometry) {
  const auto m = vertex_multipliers(schedule, geometry);
  std::vector<GroupElement> out;
  out.reserve(m.size());
  for (double f : m) out.push_back(schedule.g.scaled(f));
  return out;
}

LoopConfiguration apply_tuned(const GroupElement& g, const std::vector<double>& multipliers,
                              const LoopConfiguration& config, bool inverse) {
  LoopConfiguration out(config.beta(), config.slices(), config.dim());
  for (std::size_t i = 0; i < config.size(); ++i) {
    const auto v = config.vertices()[i];
    if (v >= multipliers.size()) fail(ErrorCode::UnknownVertex, "no multiplier for vertex " + std::to_string(v));
    const double f = multipliers[v];
    if (f == 0.0) {
      out.set(v, config.paths()[i]);
      continue;
    }
    GroupElement gv = g.scaled(f);
    if (inverse) gv = gv.inverse();
    out.set(v, apply_group_path(gv, config.paths()[i]));
  }
  return out;
}

TaylorGap taylor_gap(const InteractionSpec& spec, const DiscretizedPath& a, const DiscretizedPath& b, double gamma_i,
                     double gamma_j, const GroupElement& g) {
  if (a.slices() != b.slices() || a.dim() != b.dim() || a.dim() != spec.dim())
    fail(ErrorCode::MismatchedPaths, "Taylor gap needs matching paths");
  const GroupElement gi = g.scaled(gamma_i), gj = g.scaled(gamma_j);
  const auto pi = apply_group_path(gi, a), pj = apply_group_path(gj, b);
  const auto mi = apply_group_path(gi.inverse(), a), mj = apply_group_path(gj.inverse(), b);
  const auto& v = spec.v();
  const std::size_t d = a.dim();
  TaylorGap out;
  for (std::size_t s = 0; s <= a.slices(); ++s) {
    const double gap = std::abs(v(pi.slice(s), pj.slice(s), d) + v(mi.slice(s), mj.slice(s), d) -
                                2.0 * v(a.slice(s), b.slice(s), d));
    out.gap = std::max(out.gap, gap);
  }
  const double dg = gamma_i - gamma_j;
  out.unit_bound = theta_sq(g) * dg * dg * spec.v_bar();
  return out;
}

TaylorFit fit_taylor_constant(const InteractionSpec& spec, const GroupElement& g, double beta, std::size_t slices,
                              std::size_t pairs, Stream& rng) {
  TaylorFit fit;
  fit.pairs = pairs;
  for (std::size_t p = 0; p < pairs; ++p) {
    TorusPoint x(spec.dim()), y(spec.dim());
    for (auto& w : x.words()) w = rng();
    for (auto& w : y.words()) w = rng();
    const auto a = sample_loop(x, beta, slices, rng);
    const auto b = sample_loop(y, beta, slices, rng);
    const double gi = rng.uniform(), gj = rng.uniform();
    const auto t = taylor_gap(spec, a, b, gi, gj, g);
    if (!(t.unit_bound > 0.0)) continue;
    const double c = t.gap / t.unit_bound;
    fit.constant = std::max(fit.constant, c);
    auto& half = 2 * p < pairs ? fit.first_half : fit.second_half;
    half = std::max(half, c);
  }
  return fit;
}

std::optional<double> analytic_taylor_constant(const InteractionSpec& spec) {
  switch (spec.v().kind) {
    case PotentialV::Kind::Zero: return 0.0;
    // |cos(p + q) + cos(p - q) - 2 cos p| <= q^2 with q = 2 pi k . u, and
    // V-bar >= 4 pi^2 |v0| |k|^2.
    case PotentialV::Kind::CosineDifference: return 1.0;
    case PotentialV::Kind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::uint32_t> vertices_up_to(const DistanceOracle& geometry, std::uint32_t level) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < geometry.vertex_count(); ++v)
    if (geometry.level_of(v) <= level) out.push_back(v);
  return out;
}

std::vector<std::uint32_t> vertices_on(const DistanceOracle& geometry, std::uint32_t level) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < geometry.vertex_count(); ++v)
    if (geometry.level_of(v) == level) out.push_back(v);
  return out;
}

namespace {

// Sum over targets of J(d) |gamma_src - gamma_t|^2 from one source, with the
// beyond-radius and beyond-geometry remainders.
struct SourceSum {
  double value = 0.0;
  double tail = 0.0;
};

SourceSum source_sum(std::uint32_t src, const std::vector<double>& gamma, const DistanceOracle& geometry, const Decay& j,
                     std::uint32_t radius, const TunedSchedule& schedule, const LayerBound& bound) {
  const auto dist = geometry.distances_from(src);
  SourceSum out;
  std::size_t beyond = 0;
  double worst = 0.0;
  for (std::uint32_t t = 0; t < dist->size(); ++t) {
    const auto d = (*dist)[t];
    if (d == 0 || d == DistanceOracle::kUnreachable) continue;
    const double dg = gamma[src] - gamma[t];
    if (dg == 0.0) continue;
    if (d > radius) {
      ++beyond;
      worst = std::max(worst, dg * dg);
      continue;
    }
    out.value += j(static_cast<double>(d)) * dg * dg;
  }
  if (beyond > 0) out.tail += static_cast<double>(beyond) * worst * j(static_cast<double>(radius) + 1.0);
  const double top = static_cast<double>(geometry.layer_sizes().size() - 1);
  // Above the geometry gamma = 0 once the top level reaches n'; otherwise only
  // |difference| <= 1 is known.
  const double g = gamma[src];
  const double far_diff = top + 1.0 >= schedule.n_prime ? g * g : std::max(g * g, (1.0 - g) * (1.0 - g));
  if (far_diff > 0.0) out.tail += far_diff * beyond_levels_tail(geometry.level_of(src), top, j, bound);
  return out;
}

}  // namespace

PhiValue phi_series(const TunedSchedule& schedule, const DistanceOracle& geometry, const Decay& j, std::uint32_t radius) {
  const auto gamma = vertex_multipliers(schedule, geometry);
  const double t2 = theta_sq(schedule.g);
  PhiValue out;
  if (t2 == 0.0 || j.is_zero()) return out;
  const LayerBound bound = growth_layer_bound(geometry.layer_sizes());
  for (auto src : vertices_up_to(geometry, schedule.n)) {
    const auto s = source_sum(src, gamma, geometry, j, radius, schedule, bound);
    out.value += s.value;
    out.tail_bound += s.tail;
    ++out.sources;
  }
  out.value *= t2;
  out.tail_bound *= t2;
  return out;
}

PhiValue phi_certificate(const TunedSchedule& schedule, const DistanceOracle& geometry, const Decay& j,
                         std::size_t max_sources) {
  const auto gamma = vertex_multipliers(schedule, geometry);
  const double t2 = theta_sq(schedule.g);
  PhiValue out;
  if (t2 == 0.0 || j.is_zero()) return out;
  // Sources: every vertex with gamma > 0 (those outside carry no shift).
  std::vector<std::uint32_t> sources;
  for (std::uint32_t v = 0; v < gamma.size(); ++v)
    if (gamma[v] > 0.0) sources.push_back(v);
  if (sources.size() > max_sources)
    fail(ErrorCode::TooLarge, std::to_string(sources.size()) + " certificate sources exceed " + std::to_string(max_sources));
  const LayerBound bound = growth_layer_bound(geometry.layer_sizes());
  std::vector<char> in(gamma.size(), 0);
  for (auto v : sources) in[v] = 1;
  for (auto src : sources) {
    // Ordered pairs inside the support once each, pairs leaving it twice
    // (both orders carry the same value).
    const auto s = source_sum(src, gamma, geometry, j, DistanceOracle::kUnreachable, schedule, bound);
    const auto dist = geometry.distances_from(src);
    double outside = 0.0;
    for (std::uint32_t t = 0; t < dist->size(); ++t) {
      const auto d = (*dist)[t];
      if (in[t] || d == DistanceOracle::kUnreachable) continue;
      outside += j(static_cast<double>(d)) * gamma[src] * gamma[src];
    }
    out.value += s.value + outside;
    out.tail_bound += 2.0 * s.tail;
    ++out.sources;
  }
  out.value *= t2;
  out.tail_bound *= t2;
  return out;
}

double phi_double_sum(const TunedSchedule& schedule, const DistanceOracle& geometry, const Decay& j) {
  const auto gamma = vertex_multipliers(schedule, geometry);
  std::vector<char> window(gamma.size(), 0);
  for (auto v : vertices_up_to(geometry, schedule.n)) window[v] = 1;
  double s = 0.0;
  for (std::uint32_t a = 0; a < gamma.size(); ++a) {
    if (!window[a]) continue;
    for (std::uint32_t b = 0; b < gamma.size(); ++b) {
      if (a == b) continue;
      const double dg = gamma[a] - gamma[b];
      s += j(static_cast<double>(geometry.distance(a, b))) * dg * dg;
    }
  }
  return theta_sq(schedule.g) * s;
}

PhiDecayFit phi_decay_fit(const std::vector<std::uint32_t>& n_primes, const std::vector<double>& phis,
                          std::uint32_t r_bar, double ratio_limit) {
  if (n_primes.size() != phis.size()) fail(ErrorCode::DimensionMismatch, "one phi per n'");
  if (n_primes.size() < 5) fail(ErrorCode::NotEnoughPoints, "need at least 5 values of n'");
  PhiDecayFit fit;
  fit.n_primes = n_primes;
  fit.phis = phis;
  fit.degenerate = std::all_of(phis.begin(), phis.end(), [](double p) { return p == 0.0; });
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    if (n_primes[i] <= r_bar) fail(ErrorCode::ConfigInvalid, "n' must exceed r_bar");
    const double q = big_q(static_cast<double>(n_primes[i] - r_bar));
    fit.scaled.push_back(phis[i] * q);
    sxy += phis[i] / q;
    sxx += 1.0 / (q * q);
  }
  if (fit.degenerate) {
    fit.bounded = true;
    fit.nonincreasing = true;
    fit.ratio = 1.0;
    return fit;
  }
  fit.slope = sxy / sxx;
  double rr = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const double q = big_q(static_cast<double>(n_primes[i] - r_bar));
    const double rel = phis[i] > 0.0 ? (phis[i] - fit.slope / q) / phis[i] : 0.0;
    rr += rel * rel;
  }
  fit.residual = std::sqrt(rr / static_cast<double>(phis.size()));
  const auto [lo, hi] = std::minmax_element(fit.scaled.begin(), fit.scaled.end());
  fit.ratio = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
  fit.bounded = fit.ratio < ratio_limit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    mx += std::log(static_cast<double>(n_primes[i]));
    my += fit.scaled[i];
  }
  mx /= static_cast<double>(phis.size());
  my /= static_cast<double>(phis.size());
  double cxy = 0.0, cxx = 0.0;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const double dx = std::log(static_cast<double>(n_primes[i])) - mx;
    cxy += dx * (fit.scaled[i] - my);
    cxx += dx * dx;
  }
  fit.trend = cxx > 0.0 ? cxy / cxx : 0.0;
  fit.nonincreasing = fit.trend <= 1e-9 * std::max(1.0, std::abs(my));
  return fit;
}

double certified_margin(double a, double constant, double phi) noexcept { return a * std::exp(-0.5 * constant * phi); }

double convexity_constant(const InteractionSpec& spec, double beta, double taylor_constant) {
  return beta * taylor_constant * spec.v_bar();
}

ConvexityReport convexity_check(const std::vector<LoopConfiguration>& samples, const ClassicalBoundary& boundary,
                                const TunedSchedule& schedule, const DistanceOracle& geometry,
                                const InteractionSpec& spec, double a) {
  if (!(a > 1.0)) fail(ErrorCode::ConfigInvalid, "convexity check needs a > 1");
  const auto gamma = vertex_multipliers(schedule, geometry);
  ConvexityReport rep;
  rep.min_log_margin = std::numeric_limits<double>::infinity();
  rep.max_half_gap = -std::numeric_limits<double>::infinity();
  const double log_half_a = std::log(0.5 * a);
  for (const auto& cfg : samples) {
    const EnergyModel model(geometry, spec, cfg.vertices(), boundary);
    std::vector<std::size_t> inner;
    for (std::size_t i = 0; i < cfg.size(); ++i)
      if (geometry.level_of(cfg.vertices()[i]) < schedule.n_prime) inner.push_back(i);
    auto energy = [&](const LoopConfiguration& c) {
      std::vector<const DiscretizedPath*> ptrs;
      for (const auto& p : c.paths()) ptrs.push_back(&p);
      return model.subset(inner, ptrs);
    };
    const double h0 = energy(cfg);
    const double dp = energy(apply_tuned(schedule.g, gamma, cfg, false)) - h0;
    const double dm = energy(apply_tuned(schedule.g, gamma, cfg, true)) - h0;
    // log((a/2)(e^-dp + e^-dm)) without overflow.
    const double lo = std::min(dp, dm);
    const double log_margin = log_half_a - lo + std::log1p(std::exp(-(std::max(dp, dm) - lo)));
    rep.min_log_margin = std::min(rep.min_log_margin, log_margin);
    rep.mean_log_margin += log_margin;
    rep.max_half_gap = std::max(rep.max_half_gap, 0.5 * (dp + dm));
    ++rep.samples;
    if (log_margin >= 0.0) ++rep.satisfied;
  }
  if (rep.samples > 0) {
    rep.fraction = static_cast<double>(rep.satisfied) / static_cast<double>(rep.samples);
    rep.mean_log_margin /= static_cast<double>(rep.samples);
  } else {
    rep.min_log_margin = 0.0;
    rep.max_half_gap = 0.0;
  }
  return rep;
}

std::vector<LoopConfiguration> sample_window_configurations(GibbsSampler& chain, const std::vector<std::uint32_t>& window,
                                                            std::size_t count, std::size_t thin, Stream& rng) {
  std::vector<LoopConfiguration> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    chain.sweeps(std::max<std::size_t>(thin, 1));
    LoopConfiguration cfg = chain.configuration();
    for (auto v : window) {
      const auto& p = cfg.at(v);
      TorusPoint x(p.dim()), y(p.dim());
      for (auto& w : x.words()) w = rng();
      for (auto& w : y.words()) w = rng();
      cfg.set(v, sample_bridge(x, y, p.beta(), p.slices(), rng));
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

KernelGap kernel_transport_gap(const RdmKernelEstimate& est, std::size_t shift_steps) {
  if (est.grid == 0 || est.x_grid.size() != est.x_points.size() || est.y_grid.size() != est.y_points.size())
    fail(ErrorCode::GridMismatch, "kernel transport needs grid coordinates");
  const std::size_t G = est.grid;
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, std::size_t> index;
  for (std::size_t p = 0; p < est.pairs.size(); ++p) index[{est.x_grid[est.pairs[p].first], est.y_grid[est.pairs[p].second]}] = p;
  KernelGap out;
  for (std::size_t p = 0; p < est.pairs.size(); ++p) {
    auto xs = est.x_grid[est.pairs[p].first];
    auto ys = est.y_grid[est.pairs[p].second];
    for (auto& c : xs) c = (c + G - shift_steps % G) % G;
    for (auto& c : ys) c = (c + G - shift_steps % G) % G;
    auto it = index.find({xs, ys});
    if (it == index.end()) continue;
    const std::size_t q = it->second;
    const double diff = std::abs(est.values[q] - est.values[p]);
    const double ep = est.std_errors.empty() ? 0.0 : est.std_errors[p];
    const double eq = est.std_errors.empty() ? 0.0 : est.std_errors[q];
    const double sigma = std::sqrt(ep * ep + eq * eq);
    if (diff > out.gap || out.compared == 0) {
      out.gap = diff;
      out.sigma = sigma;
    }
    if (sigma > 0.0) out.max_z = std::max(out.max_z, diff / sigma);
    ++out.compared;
  }
  return out;
}

RatioGap ratio_gap(GibbsSampler& chain, const TunedSchedule& schedule, const DistanceOracle& geometry,
                   std::size_t samples, std::size_t thin) {
  if (samples < 2) fail(ErrorCode::NotEnoughSamples, "need at least two samples");
  const auto gamma = vertex_multipliers(schedule, geometry);
  const EnergyModel& model = chain.model();
  std::vector<std::size_t> inner;
  for (std::size_t i = 0; i < model.size(); ++i)
    if (geometry.level_of(model.vertices()[i]) < schedule.n_prime) inner.push_back(i);
  std::vector<double> w;
  w.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    chain.sweeps(std::max<std::size_t>(thin, 1));
    const auto& cfg = chain.configuration();
    const auto moved = apply_tuned(schedule.g, gamma, cfg, false);
    std::vector<const DiscretizedPath*> a, b;
    for (const auto& p : cfg.paths()) a.push_back(&p);
    for (const auto& p : moved.paths()) b.push_back(&p);
    w.push_back(std::exp(-(model.subset(inner, b) - model.subset(inner, a))));
  }
  // Batch means over 32 batches (fewer for short runs).
  const std::size_t batches = std::min<std::size_t>(32, samples / 2);
  const std::size_t per = samples / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t i = 0; i < batches * per; ++i) means[i / per] += w[i] / static_cast<double>(per);
  RatioGap out;
  out.ratio = 0.0;
  for (double m : means) out.ratio += m / static_cast<double>(batches);
  double ss = 0.0;
  for (double m : means) ss += (m - out.ratio) * (m - out.ratio);
  out.std_error = std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
  return out;
}

std::vector<GapPoint> invariance_gap(const DistanceOracle& geometry, const InteractionSpec& spec, std::uint32_t window_level,
                                     const std::vector<std::uint32_t>& volume_levels,
                                     const std::optional<TorusPoint>& boundary_spin, const GridParams& params,
                                     std::size_t shift_steps) {
  std::vector<GapPoint> out;
  for (auto N : volume_levels) {
    if (N < window_level) fail(ErrorCode::ConfigInvalid, "volume level below the window level");
    ExactProblem problem;
    problem.volume = vertices_up_to(geometry, N);
    problem.window = vertices_up_to(geometry, window_level);
    if (boundary_spin)
      for (auto v : vertices_on(geometry, N + 1)) problem.boundary.set(v, *boundary_spin);
    const auto est = brute_force_rdmk(problem, geometry, spec, params);
    GapPoint pt;
    pt.volume_level = N;
    pt.gap_kernel = kernel_transport_gap(est, shift_steps).gap;
    pt.trace = est.trace().value_or(std::numeric_limits<double>::quiet_NaN());
    out.push_back(pt);
  }
  return out;
}

LipschitzReport lipschitz_check(const TunedSchedule& schedule, const DistanceOracle& geometry) {
  const auto gamma = vertex_multipliers(schedule, geometry);
  const auto root = geometry.distances_from(geometry.root());
  const double qb = big_q(static_cast<double>(schedule.n_prime - schedule.r_bar));
  LipschitzReport rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  const std::size_t n = geometry.vertex_count();
  for (std::uint32_t a = 0; a < n; ++a) {
    const auto dist = geometry.bfs_distances(a);
    const double ka = profile_k(schedule, geometry, a, *root);
    const double za = z_fn(ka - static_cast<double>(schedule.r_bar));
    for (std::uint32_t b = 0; b < n; ++b) {
      if (a == b) continue;
      const double kb = profile_k(schedule, geometry, b, *root);
      if (ka > kb) continue;
      const double diff = gamma[a] - gamma[b];
      const double upper = static_cast<double>(dist[b]) * za / qb;
      const double slack = std::min(diff, upper - diff);
      const double tol = 1e-12 * std::max(1.0, upper);
      if (diff < -tol || diff > upper + tol) {
        ++rep.violations;
        rep.max_excess = std::max(rep.max_excess, diff < 0.0 ? -diff : diff - upper);
      }
      rep.min_slack = std::min(rep.min_slack, slack);
      ++rep.pairs;
    }
  }
  if (rep.pairs == 0) rep.min_slack = 0.0;
  return rep;
}

}  // namespace lfk
