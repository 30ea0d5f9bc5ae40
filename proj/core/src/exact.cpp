#include "lorentzfk/exact.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

constexpr double kTol = 1e-16;

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

void check_params(const InteractionSpec& spec, const GridParams& params) {
  if (spec.dim() != 1) fail(ErrorCode::DimensionMismatch, "brute-force kernels need d = 1");
  if (params.grid < 2) fail(ErrorCode::BadSliceCount, "grid needs at least two points");
  if (params.slices < 1) fail(ErrorCode::BadSliceCount, "need at least one time step");
  if (!(params.beta > 0.0)) fail(ErrorCode::NonpositiveBeta, "beta must be positive");
}

Word grid_word(std::size_t g, std::size_t grid) {
  return unit_to_word(static_cast<double>(g) / static_cast<double>(grid));
}

/// P(a, b) = p^step(a/G, b/G) / G.
std::vector<double> step_matrix(const GridParams& params) {
  const std::size_t G = params.grid;
  const double step = params.beta / static_cast<double>(params.slices);
  std::vector<double> p(G * G);
  for (std::size_t a = 0; a < G; ++a)
    for (std::size_t b = 0; b < G; ++b)
      p[a * G + b] = theta_1d(static_cast<double>(a) / G - static_cast<double>(b) / G, step, kTol) / static_cast<double>(G);
  return p;
}

/// The volume ordered window first, then the rest.
struct Layout {
  std::vector<std::uint32_t> order;
  std::size_t window = 0;
};

Layout layout(const ExactProblem& problem) {
  std::vector<std::uint32_t> vol = problem.volume, win = problem.window;
  std::sort(vol.begin(), vol.end());
  vol.erase(std::unique(vol.begin(), vol.end()), vol.end());
  std::sort(win.begin(), win.end());
  win.erase(std::unique(win.begin(), win.end()), win.end());
  for (auto v : win)
    if (!std::binary_search(vol.begin(), vol.end(), v))
      fail(ErrorCode::WindowTooLarge, "window vertex " + std::to_string(v) + " outside the volume");
  if (vol.empty()) fail(ErrorCode::EmptyInput, "empty volume");
  Layout out;
  out.order = win;
  out.window = win.size();
  for (auto v : vol)
    if (!std::binary_search(win.begin(), win.end(), v)) out.order.push_back(v);
  return out;
}

/// Single-site potential including boundary fields, per vertex and grid point.
std::vector<std::vector<double>> site_tables(const EnergyModel& model, const GridParams& params) {
  const std::size_t G = params.grid;
  std::vector<std::vector<double>> out(model.size(), std::vector<double>(G));
  for (std::size_t i = 0; i < model.size(); ++i)
    for (std::size_t a = 0; a < G; ++a) {
      // A constant path over a unit time span reads off the pointwise value.
      const auto path = DiscretizedPath::constant(TorusPoint::from_words({grid_word(a, G)}), 1.0, 1, true);
      out[i][a] = model.site(i, path);
    }
  return out;
}

/// V(a, b) + V(b, a) on the grid.
std::vector<double> pair_table(const InteractionSpec& spec, std::size_t G) {
  std::vector<double> out(G * G);
  for (std::size_t a = 0; a < G; ++a)
    for (std::size_t b = 0; b < G; ++b) {
      const Word wa = grid_word(a, G), wb = grid_word(b, G);
      out[a * G + b] = spec.v()(&wa, &wb, 1) + spec.v()(&wb, &wa, 1);
    }
  return out;
}

double time_slice_cost(std::size_t nv, const GridParams& params) {
  const double s = std::pow(static_cast<double>(params.grid), static_cast<double>(nv));
  return s * s * static_cast<double>(params.slices * nv * params.grid);
}

double chain_cost(std::size_t nv, const GridParams& params) {
  const double gl = std::pow(static_cast<double>(params.grid), static_cast<double>(params.slices));
  return static_cast<double>(nv * params.slices) * gl * static_cast<double>(params.grid) +
         static_cast<double>(params.slices) * gl * static_cast<double>(params.grid * params.grid);
}

struct KernelResult {
  std::vector<double> values;  // G^#W x G^#W, row-major
  double partition = 0.0;
};

KernelResult run_time_slice(const Layout& lay, const ExactProblem& problem, const DistanceOracle& geometry,
                            const InteractionSpec& spec, const GridParams& params) {
  const std::size_t G = params.grid, L = params.slices, nv = lay.order.size();
  const std::size_t S = ipow(G, nv);
  const std::size_t SW = ipow(G, lay.window);
  const std::size_t SE = S / SW;
  const EnergyModel model(geometry, spec, lay.order, problem.boundary);
  const auto sites = site_tables(model, params);
  const auto pairs = pair_table(spec, G);
  std::vector<double> energy(S, 0.0);
  std::vector<std::size_t> digit(nv);
  for (std::size_t x = 0; x < S; ++x) {
    std::size_t r = x;
    for (std::size_t i = 0; i < nv; ++i) {
      digit[i] = r % G;
      r /= G;
    }
    double e = 0.0;
    for (std::size_t i = 0; i < nv; ++i) {
      e += sites[i][digit[i]];
      for (std::size_t k = i + 1; k < nv; ++k) e += model.coupling(i, k) * pairs[digit[i] * G + digit[k]];
    }
    energy[x] = e;
  }
  const double step = params.beta / static_cast<double>(L);
  std::vector<double> full(S), half(S);
  for (std::size_t x = 0; x < S; ++x) {
    full[x] = std::exp(-step * energy[x]);
    half[x] = std::exp(-0.5 * step * energy[x]);
  }
  const auto P = step_matrix(params);

  KernelResult out;
  out.values.assign(SW * SW, 0.0);
  std::vector<double> v(S), w(S);
  const double gnv = std::pow(static_cast<double>(G), static_cast<double>(nv));
  const double ge = std::pow(static_cast<double>(G), -static_cast<double>(nv - lay.window));
  for (std::size_t x0 = 0; x0 < S; ++x0) {
    std::fill(v.begin(), v.end(), 0.0);
    v[x0] = half[x0];
    for (std::size_t s = 1; s <= L; ++s) {
      std::size_t stride = 1;
      for (std::size_t i = 0; i < nv; ++i, stride *= G) {
        const std::size_t block = stride * G;
        for (std::size_t base = 0; base < S; base += block)
          for (std::size_t off = 0; off < stride; ++off) {
            const std::size_t o = base + off;
            for (std::size_t a = 0; a < G; ++a) {
              double acc = 0.0;
              const double* row = &P[a * G];
              for (std::size_t b = 0; b < G; ++b) acc += row[b] * v[o + b * stride];
              w[o + a * stride] = acc;
            }
          }
        std::swap(v, w);
      }
      const auto& weight = s < L ? full : half;
      for (std::size_t x = 0; x < S; ++x) v[x] *= weight[x];
    }
    out.partition += v[x0];
    const std::size_t xw = x0 % SW, xe = x0 / SW;
    for (std::size_t yw = 0; yw < SW; ++yw) out.values[xw * SW + yw] += ge * gnv * v[xe * SW + yw];
  }
  (void)SE;
  for (auto& f : out.values) f /= out.partition;
  return out;
}

/// (prod_s c) applied along every slice axis listed in `axes` of a G^L tensor.
void apply_slices(std::vector<double>& t, const std::vector<double>& c, std::size_t G, std::size_t L,
                  std::size_t first_axis) {
  std::vector<double> w(t.size());
  std::size_t stride = ipow(G, first_axis);
  for (std::size_t ax = first_axis; ax < L; ++ax, stride *= G) {
    const std::size_t block = stride * G;
    for (std::size_t base = 0; base < t.size(); base += block)
      for (std::size_t off = 0; off < stride; ++off) {
        const std::size_t o = base + off;
        for (std::size_t a = 0; a < G; ++a) {
          double acc = 0.0;
          for (std::size_t b = 0; b < G; ++b) acc += c[a * G + b] * t[o + b * stride];
          w[o + a * stride] = acc;
        }
      }
    std::swap(t, w);
  }
}

KernelResult run_chain(const std::vector<std::uint32_t>& order, const ExactProblem& problem,
                       const DistanceOracle& geometry, const InteractionSpec& spec, const GridParams& params) {
  const std::size_t G = params.grid, L = params.slices, nv = order.size();
  const std::size_t GL = ipow(G, L);
  const EnergyModel model(geometry, spec, order, problem.boundary);
  const auto sites = site_tables(model, params);
  const auto pairs = pair_table(spec, G);
  const auto P = step_matrix(params);
  const double step = params.beta / static_cast<double>(L);

  // Loop weight of vertex i on the grid loop z (axis s = slice s).
  auto loop_weight = [&](std::size_t i, std::size_t z) {
    std::vector<std::size_t> zs(L);
    for (std::size_t s = 0; s < L; ++s) {
      zs[s] = z % G;
      z /= G;
    }
    double w = 1.0, e = 0.0;
    for (std::size_t s = 0; s < L; ++s) {
      w *= P[zs[s] * G + zs[(s + 1) % L]];
      e += sites[i][zs[s]];
    }
    return w * std::exp(-step * e);
  };
  auto coupling_matrix = [&](double j, double scale) {
    std::vector<double> c(G * G);
    for (std::size_t q = 0; q < G * G; ++q) c[q] = std::exp(-scale * step * j * pairs[q]);
    return c;
  };

  // phi for vertices nv-1 down to 1.
  std::vector<double> phi(GL, 1.0);
  bool have_phi = false;
  for (std::size_t i = nv; i-- > 1;) {
    if (have_phi) apply_slices(phi, coupling_matrix(model.coupling(i, i + 1), 1.0), G, L, 0);
    for (std::size_t z = 0; z < GL; ++z) phi[z] *= loop_weight(i, z);
    have_phi = true;
  }
  const double j01 = nv > 1 ? model.coupling(0, 1) : 0.0;

  KernelResult out;
  // Partition sum: root loop against the neighbour message.
  {
    std::vector<double> m = phi;
    if (have_phi) apply_slices(m, coupling_matrix(j01, 1.0), G, L, 0);
    double xi = 0.0;
    for (std::size_t z = 0; z < GL; ++z) xi += loop_weight(0, z) * (have_phi ? m[z] : 1.0);
    out.partition = xi;
  }
  // T(z'_0, z_1 .. z_{L-1}): the message with slices 1.. transformed.
  std::vector<double> t = phi;
  if (have_phi && L > 1) apply_slices(t, coupling_matrix(j01, 1.0), G, L, 1);
  const auto c_half = coupling_matrix(j01, 0.5);
  const std::size_t inner = GL / G;  // z_1 .. z_{L-1}
  std::vector<double> path_w(inner * G * G, 0.0);  // (x, y, inner) bridge weights
  for (std::size_t x = 0; x < G; ++x)
    for (std::size_t y = 0; y < G; ++y)
      for (std::size_t r = 0; r < inner; ++r) {
        std::size_t q = r, prev = x;
        double w = 1.0, e = 0.5 * (sites[0][x] + sites[0][y]);
        for (std::size_t s = 1; s < L; ++s) {
          const std::size_t z = q % G;
          q /= G;
          w *= P[prev * G + z];
          e += sites[0][z];
          prev = z;
        }
        w *= P[prev * G + y];
        path_w[(x * G + y) * inner + r] = w * std::exp(-step * e);
      }
  out.values.assign(G * G, 0.0);
  for (std::size_t x = 0; x < G; ++x)
    for (std::size_t y = 0; y < G; ++y) {
      double acc = 0.0;
      const double* pw = &path_w[(x * G + y) * inner];
      if (!have_phi) {
        for (std::size_t r = 0; r < inner; ++r) acc += pw[r];
      } else {
        for (std::size_t z0 = 0; z0 < G; ++z0) {
          double s = 0.0;
          for (std::size_t r = 0; r < inner; ++r) s += pw[r] * t[z0 + G * r];
          acc += c_half[x * G + z0] * c_half[y * G + z0] * s;
        }
      }
      out.values[x * G + y] = static_cast<double>(G) * acc / out.partition;
    }
  return out;
}

ExactEngine choose(const ExactProblem& problem, const DistanceOracle& geometry, const InteractionSpec& spec,
                   const GridParams& params, ExactEngine engine, std::vector<std::uint32_t>& order) {
  order = chain_order(problem, geometry, spec);
  if (engine == ExactEngine::Chain && order.empty())
    fail(ErrorCode::TooLarge, "the chain engine needs a nearest-neighbour chain with the window at one end");
  if (engine == ExactEngine::Auto) {
    const std::size_t nv = layout(problem).order.size();
    engine = !order.empty() && chain_cost(nv, params) < time_slice_cost(nv, params) ? ExactEngine::Chain
                                                                                     : ExactEngine::TimeSlice;
  }
  const double cost = exact_cost(problem, geometry, spec, params, engine);
  if (cost > kExactCostLimit)
    fail(ErrorCode::TooLarge, "brute-force cost " + std::to_string(cost) + " exceeds " + std::to_string(kExactCostLimit));
  return engine;
}

}  // namespace

double exact_cost(const ExactProblem& problem, const DistanceOracle& geometry, const InteractionSpec& spec,
                  const GridParams& params, ExactEngine engine) {
  const std::size_t nv = layout(problem).order.size();
  switch (engine) {
    case ExactEngine::TimeSlice: return time_slice_cost(nv, params);
    case ExactEngine::Chain: return chain_cost(nv, params);
    case ExactEngine::Auto: break;
  }
  const double ts = time_slice_cost(nv, params);
  return chain_order(problem, geometry, spec).empty() ? ts : std::min(ts, chain_cost(nv, params));
}

std::vector<std::uint32_t> chain_order(const ExactProblem& problem, const DistanceOracle& geometry,
                                       const InteractionSpec& spec) {
  const Layout lay = layout(problem);
  if (lay.window != 1) return {};
  const EnergyModel model(geometry, spec, lay.order);
  const std::size_t n = model.size();
  std::vector<std::size_t> order{0};
  std::vector<char> used(n, 0);
  used[0] = 1;
  while (order.size() < n) {
    const std::size_t cur = order.back();
    std::size_t next = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (used[k] || model.coupling(cur, k) == 0.0) continue;
      if (next != n) return {};
      next = k;
    }
    if (next == n) {
      // Uncoupled remainder: append the lowest unused vertex.
      for (std::size_t k = 0; k < n && next == n; ++k)
        if (!used[k]) next = k;
    }
    used[next] = 1;
    order.push_back(next);
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 2; b < n; ++b)
      if (model.coupling(order[a], order[b]) != 0.0) return {};
  std::vector<std::uint32_t> out;
  for (auto i : order) out.push_back(lay.order[i]);
  return out;
}

RdmKernelEstimate brute_force_rdmk(const ExactProblem& problem, const DistanceOracle& geometry,
                                   const InteractionSpec& spec, const GridParams& params, ExactEngine engine,
                                   double coupling) {
  check_params(spec, params);
  const Layout lay = layout(problem);
  if (lay.window == 0) fail(ErrorCode::WindowTooLarge, "empty window");
  std::vector<std::uint32_t> order;
  engine = choose(problem, geometry, spec, params, engine, order);
  const KernelResult res = engine == ExactEngine::Chain ? run_chain(order, problem, geometry, spec, params)
                                                        : run_time_slice(lay, problem, geometry, spec, params);
  const std::size_t G = params.grid, SW = ipow(G, lay.window);
  RdmKernelEstimate est;
  est.method = "oracle";
  est.window.assign(lay.order.begin(), lay.order.begin() + static_cast<std::ptrdiff_t>(lay.window));
  est.grid = G;
  est.slices = params.slices;
  est.beta = params.beta;
  for (std::size_t a = 0; a < SW; ++a) {
    std::vector<std::size_t> idx(lay.window);
    std::size_t r = a;
    for (auto& g : idx) {
      g = r % G;
      r /= G;
    }
    WindowPoint pt;
    for (auto g : idx) pt.push_back(grid_point({g}, G));
    est.x_points.push_back(pt);
    est.y_points.push_back(pt);
    est.x_grid.push_back(idx);
    est.y_grid.push_back(idx);
  }
  for (std::size_t a = 0; a < SW; ++a)
    for (std::size_t b = 0; b < SW; ++b) {
      est.pairs.emplace_back(a, b);
      est.values.push_back(res.values[a * SW + b]);
      est.std_errors.push_back(0.0);
    }
  apply_uniform_bound(est, spec, coupling);
  return est;
}

double brute_force_partition(const ExactProblem& problem, const DistanceOracle& geometry, const InteractionSpec& spec,
                             const GridParams& params) {
  check_params(spec, params);
  ExactProblem p = problem;
  if (p.window.empty()) p.window = {*std::min_element(p.volume.begin(), p.volume.end())};
  std::vector<std::uint32_t> order;
  const ExactEngine engine = choose(p, geometry, spec, params, ExactEngine::Auto, order);
  if (engine == ExactEngine::Chain) return run_chain(order, p, geometry, spec, params).partition;
  return run_time_slice(layout(p), p, geometry, spec, params).partition;
}

double brute_force_partition_ratio(const ExactProblem& problem, const DistanceOracle& geometry,
                                   const InteractionSpec& spec, const GridParams& params) {
  const double xi = brute_force_partition(problem, geometry, spec, params);
  // Free grid partition sum per vertex: trace of P^L.
  const std::size_t G = params.grid;
  const auto P = step_matrix(params);
  std::vector<double> m(G * G, 0.0), t(G * G);
  for (std::size_t a = 0; a < G; ++a) m[a * G + a] = 1.0;
  for (std::size_t s = 0; s < params.slices; ++s) {
    for (std::size_t a = 0; a < G; ++a)
      for (std::size_t b = 0; b < G; ++b) {
        double acc = 0.0;
        for (std::size_t c = 0; c < G; ++c) acc += m[a * G + c] * P[c * G + b];
        t[a * G + b] = acc;
      }
    std::swap(m, t);
  }
  double tr = 0.0;
  for (std::size_t a = 0; a < G; ++a) tr += m[a * G + a];
  return xi / std::pow(tr, static_cast<double>(layout(problem).order.size()));
}

DiscretizedPath grid_loop(const std::vector<std::size_t>& indices, std::size_t grid, double beta) {
  if (indices.empty()) fail(ErrorCode::BadSliceCount, "grid loop needs at least one slice");
  std::vector<Word> w;
  for (auto z : indices) w.push_back(grid_word(z % grid, grid));
  w.push_back(w.front());
  return DiscretizedPath(beta, indices.size(), 1, true, std::move(w));
}

double grid_loop_weight(const std::vector<std::size_t>& indices, std::size_t grid, double beta) {
  const std::size_t L = indices.size();
  const double step = beta / static_cast<double>(L);
  double w = 1.0;
  for (std::size_t s = 0; s < L; ++s) {
    const double a = static_cast<double>(indices[s] % grid) / static_cast<double>(grid);
    const double b = static_cast<double>(indices[(s + 1) % L] % grid) / static_cast<double>(grid);
    w *= theta_1d(a - b, step, kTol) / static_cast<double>(grid);
  }
  return w;
}

double fkdlr_residual(const ExactProblem& problem, const std::vector<std::uint32_t>& inner, const DistanceOracle& geometry,
                      const InteractionSpec& spec, const FkdlrParams& params, Stream& rng) {
  check_params(spec, params.grid);
  const Layout lay = layout(problem);
  std::vector<std::uint32_t> in = inner;
  std::sort(in.begin(), in.end());
  in.erase(std::unique(in.begin(), in.end()), in.end());
  if (in.empty()) fail(ErrorCode::WindowTooLarge, "empty inner set");
  std::vector<std::uint32_t> vol(lay.order);
  std::sort(vol.begin(), vol.end());
  std::vector<std::uint32_t> out_vs;
  for (auto v : vol)
    if (!std::binary_search(in.begin(), in.end(), v)) out_vs.push_back(v);
  if (out_vs.size() + in.size() != vol.size()) fail(ErrorCode::WindowTooLarge, "inner set outside the volume");
  const std::size_t G = params.grid.grid, L = params.grid.slices;
  const double beta = params.grid.beta;
  const double enumerations = std::pow(static_cast<double>(G), static_cast<double>(L * in.size()));
  if (enumerations > 1e7) fail(ErrorCode::TooLarge, "inner enumeration of " + std::to_string(enumerations) + " loops");
  const auto count = static_cast<std::size_t>(enumerations);

  ExactProblem p = problem;
  p.window = {in.front()};
  const double xi = brute_force_partition(p, geometry, spec, params.grid);

  auto random_loop = [&]() {
    std::vector<std::size_t> z(L);
    for (auto& v : z) v = static_cast<std::size_t>(rng.below(G));
    return z;
  };
  auto decode = [&](std::size_t code, std::vector<std::vector<std::size_t>>& loops) {
    for (auto& z : loops)
      for (auto& s : z) {
        s = code % G;
        code /= G;
      }
  };

  double residual = 0.0;
  std::vector<std::vector<std::size_t>> loops(in.size(), std::vector<std::size_t>(L));
  for (std::size_t o = 0; o < params.outer_tests; ++o) {
    LoopConfiguration outer(beta, L, 1);
    for (auto v : out_vs) outer.set(v, grid_loop(random_loop(), G, beta));
    // Normalizers over all inner grid loops, by both routes.
    double joint_marginal = 0.0, cond_partition = 0.0;
    for (std::size_t code = 0; code < count; ++code) {
      decode(code, loops);
      LoopConfiguration cfg(beta, L, 1);
      double weight = 1.0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        cfg.set(in[k], grid_loop(loops[k], G, beta));
        weight *= grid_loop_weight(loops[k], G, beta);
      }
      const double full = boundary_energy(cfg.merged(outer), problem.boundary, geometry, spec).value;
      joint_marginal += weight * std::exp(-full) / xi;
      cond_partition += weight * std::exp(-conditional_energy(cfg, outer, &problem.boundary, geometry, spec));
    }
    for (std::size_t t = 0; t < params.inner_tests; ++t) {
      LoopConfiguration cfg(beta, L, 1);
      for (auto v : in) cfg.set(v, grid_loop(random_loop(), G, beta));
      const double full = boundary_energy(cfg.merged(outer), problem.boundary, geometry, spec).value;
      const double lhs = (std::exp(-full) / xi) / joint_marginal;
      const double rhs = std::exp(-conditional_energy(cfg, outer, &problem.boundary, geometry, spec)) / cond_partition;
      residual = std::max(residual, std::abs(lhs - rhs));
    }
  }
  return residual;
}

}  // namespace lfk
