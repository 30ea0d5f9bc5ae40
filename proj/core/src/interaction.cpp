#include "lorentzfk/interaction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mode_norm(const std::vector<int>& mode) {
  double s = 0.0;
  for (int m : mode) s += static_cast<double>(m) * m;
  return std::sqrt(s);
}

// Max of |q| plus half its largest change between grid neighbours, over a
// periodic grid of n^m points holding f.
class PeriodicGrid {
 public:
  PeriodicGrid(std::size_t m, std::size_t n) : m_(m), n_(n) {
    total_ = 1;
    for (std::size_t i = 0; i < m; ++i) total_ *= n;
    stride_.resize(m);
    std::size_t s = 1;
    for (std::size_t i = 0; i < m; ++i) {
      stride_[i] = s;
      s *= n;
    }
  }
  std::size_t total() const { return total_; }
  std::size_t m() const { return m_; }
  double step() const { return 1.0 / static_cast<double>(n_); }
  std::size_t coord(std::size_t idx, std::size_t axis) const { return (idx / stride_[axis]) % n_; }
  std::size_t shift(std::size_t idx, std::size_t axis, long delta) const {
    const auto c = static_cast<long>(coord(idx, axis));
    const auto n = static_cast<long>(n_);
    const long nc = ((c + delta) % n + n) % n;
    return idx + static_cast<std::size_t>(nc - c) * stride_[axis] - 0;
  }

  template <class Q>
  double certified(Q q) const {
    std::vector<double> vals(total_);
    double best = 0.0;
    for (std::size_t i = 0; i < total_; ++i) {
      vals[i] = q(i);
      best = std::max(best, std::abs(vals[i]));
    }
    double var = 0.0;
    for (std::size_t i = 0; i < total_; ++i)
      for (std::size_t a = 0; a < m_; ++a) var = std::max(var, std::abs(vals[i] - vals[shift(i, a, 1)]));
    return best + 0.5 * var;
  }

 private:
  std::size_t m_, n_, total_;
  std::vector<std::size_t> stride_;
};

std::size_t grid_points_per_dim(std::size_t vars) {
  std::size_t n = 4096;
  while (n > 8 && std::pow(static_cast<double>(n), static_cast<double>(vars)) > 4194304.0) n /= 2;
  return n;
}

void check_same_grid(const DiscretizedPath& a, const DiscretizedPath& b) {
  if (a.beta() != b.beta() || a.slices() != b.slices() || a.dim() != b.dim())
    fail(ErrorCode::MismatchedPaths, "paths differ in beta, L or d");
}

}  // namespace

double integrate_v(const DiscretizedPath& a, const DiscretizedPath& b, const PotentialV& v) {
  const std::size_t d = a.dim();
  const std::size_t L = a.slices();
  const double h = a.step();
  double acc = 0.0;
  if (a.is_loop() && b.is_loop()) {
    for (std::size_t s = 0; s < L; ++s) acc += v(a.slice(s), b.slice(s), d);
    return acc * h;
  }
  for (std::size_t s = 1; s < L; ++s) acc += v(a.slice(s), b.slice(s), d);
  acc += 0.5 * (v(a.slice(0), b.slice(0), d) + v(a.slice(L), b.slice(L), d));
  return acc * h;
}

double integrate_field(const DiscretizedPath& a, const Word* x, const PotentialV& v) {
  const std::size_t d = a.dim();
  const std::size_t L = a.slices();
  double acc = 0.0;
  if (a.is_loop()) {
    for (std::size_t s = 0; s < L; ++s) acc += v(a.slice(s), x, d);
  } else {
    for (std::size_t s = 1; s < L; ++s) acc += v(a.slice(s), x, d);
    acc += 0.5 * (v(a.slice(0), x, d) + v(a.slice(L), x, d));
  }
  return acc * a.step();
}


PotentialU PotentialU::constant(double c) {
  PotentialU u;
  u.kind = Kind::Constant;
  u.amplitude = c;
  u.name = "constant";
  return u;
}

PotentialU PotentialU::cosine(double amplitude, std::vector<int> mode) {
  PotentialU u;
  u.kind = Kind::Cosine;
  u.amplitude = amplitude;
  u.mode = std::move(mode);
  u.name = "cosine";
  return u;
}

PotentialU PotentialU::custom(std::string name, std::function<double(std::span<const double>)> fn) {
  PotentialU u;
  u.kind = Kind::Custom;
  u.name = std::move(name);
  u.fn = std::move(fn);
  return u;
}

double PotentialU::operator()(const Word* x, std::size_t dim) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return amplitude;
    case Kind::Cosine: {
      Word phase = 0;
      for (std::size_t c = 0; c < dim; ++c) phase += static_cast<Word>(static_cast<std::int64_t>(mode[c])) * x[c];
      return amplitude * std::cos(kTwoPi * signed_delta(phase, 0));
    }
    case Kind::Custom: {
      double buf[16];
      std::vector<double> big;
      double* p = buf;
      if (dim > 16) {
        big.resize(dim);
        p = big.data();
      }
      for (std::size_t c = 0; c < dim; ++c) p[c] = word_to_unit(x[c]);
      return fn(std::span<const double>(p, dim));
    }
  }
  return 0.0;
}

std::optional<double> PotentialU::closed_form_bound() const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::Constant: return std::abs(amplitude);
    case Kind::Cosine: return std::max(std::abs(amplitude), kTwoPi * std::abs(amplitude) * mode_norm(mode));
    case Kind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

PotentialV PotentialV::cosine_difference(double amplitude, std::vector<int> mode) {
  PotentialV v;
  v.kind = Kind::CosineDifference;
  v.amplitude = amplitude;
  v.mode = std::move(mode);
  v.name = "cosine_difference";
  return v;
}

PotentialV PotentialV::custom(std::string name,
                              std::function<double(std::span<const double>, std::span<const double>)> fn) {
  PotentialV v;
  v.kind = Kind::Custom;
  v.name = std::move(name);
  v.fn = std::move(fn);
  return v;
}

double PotentialV::operator()(const Word* a, const Word* b, std::size_t dim) const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::CosineDifference: {
      Word phase = 0;
      for (std::size_t c = 0; c < dim; ++c) phase += static_cast<Word>(static_cast<std::int64_t>(mode[c])) * (a[c] - b[c]);
      return amplitude * std::cos(kTwoPi * signed_delta(phase, 0));
    }
    case Kind::Custom: {
      std::vector<double> x(dim), y(dim);
      for (std::size_t c = 0; c < dim; ++c) {
        x[c] = word_to_unit(a[c]);
        y[c] = word_to_unit(b[c]);
      }
      return fn(x, y);
    }
  }
  return 0.0;
}

std::optional<double> PotentialV::closed_form_bound() const {
  switch (kind) {
    case Kind::Zero: return 0.0;
    case Kind::CosineDifference: {
      const double a = std::abs(amplitude), k = mode_norm(mode);
      return std::max({a, kTwoPi * a * k, kTwoPi * kTwoPi * a * k * k});
    }
    case Kind::Custom: return std::nullopt;
  }
  return std::nullopt;
}

double certify_u_bound(const PotentialU& u, std::size_t dim) {
  const PeriodicGrid grid(dim, grid_points_per_dim(dim));
  std::vector<double> f(grid.total());
  std::vector<Word> x(dim);
  for (std::size_t i = 0; i < grid.total(); ++i) {
    for (std::size_t c = 0; c < dim; ++c) x[c] = unit_to_word(grid.coord(i, c) * grid.step());
    f[i] = u(x.data(), dim);
  }
  const double h = grid.step();
  const double value = grid.certified([&](std::size_t i) { return f[i]; });
  const double slope = grid.certified([&](std::size_t i) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double g = (f[grid.shift(i, c, 1)] - f[grid.shift(i, c, -1)]) / (2.0 * h);
      s += g * g;
    }
    return std::sqrt(s);
  });
  return std::max(value, slope) * (1.0 + 1e-3);
}

double certify_v_bound(const PotentialV& v, std::size_t dim) {
  const PeriodicGrid grid(2 * dim, grid_points_per_dim(2 * dim));
  std::vector<double> f(grid.total());
  std::vector<Word> x(dim), y(dim);
  for (std::size_t i = 0; i < grid.total(); ++i) {
    for (std::size_t c = 0; c < dim; ++c) {
      x[c] = unit_to_word(grid.coord(i, c) * grid.step());
      y[c] = unit_to_word(grid.coord(i, dim + c) * grid.step());
    }
    f[i] = v(x.data(), y.data(), dim);
  }
  const double h = grid.step();
  auto gradient = [&](std::size_t offset) {
    return [&, offset](std::size_t i) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double g = (f[grid.shift(i, offset + c, 1)] - f[grid.shift(i, offset + c, -1)]) / (2.0 * h);
        s += g * g;
      }
      return std::sqrt(s);
    };
  };
  const double value = grid.certified([&](std::size_t i) { return f[i]; });
  const double first = grid.certified(gradient(0));
  const double second = grid.certified(gradient(dim));
  const double mixed = grid.certified([&](std::size_t i) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c)
      for (std::size_t e = 0; e < dim; ++e) {
        const std::size_t pp = grid.shift(grid.shift(i, c, 1), dim + e, 1);
        const std::size_t pm = grid.shift(grid.shift(i, c, 1), dim + e, -1);
        const std::size_t mp = grid.shift(grid.shift(i, c, -1), dim + e, 1);
        const std::size_t mm = grid.shift(grid.shift(i, c, -1), dim + e, -1);
        const double g = (f[pp] - f[pm] - f[mp] + f[mm]) / (4.0 * h * h);
        s += g * g;
      }
    return std::sqrt(s);
  });
  return std::max({value, first, second, mixed}) * (1.0 + 1e-3);
}

InteractionSpec::InteractionSpec(std::size_t dim, PotentialU u, PotentialV v, Decay j, std::optional<double> u_bar,
                                 std::optional<double> v_bar)
    : dim_(dim), u_(std::move(u)), v_(std::move(v)), j_(std::move(j)) {
  if (dim_ == 0) fail(ErrorCode::DimensionMismatch, "torus dimension must be positive");
  if (u_.kind == PotentialU::Kind::Cosine && u_.mode.size() != dim_) fail(ErrorCode::DimensionMismatch, "U mode has the wrong length");
  if (v_.kind == PotentialV::Kind::CosineDifference && v_.mode.size() != dim_)
    fail(ErrorCode::DimensionMismatch, "V mode has the wrong length");
  j_.check_admissible();
  if (u_bar) {
    u_bar_ = *u_bar;
  } else if (auto b = u_.closed_form_bound()) {
    u_bar_ = *b;
  } else {
    u_bar_ = certify_u_bound(u_, dim_);
  }
  if (v_bar) {
    v_bar_ = *v_bar;
  } else if (auto b = v_.closed_form_bound()) {
    v_bar_ = *b;
  } else {
    v_bar_ = certify_v_bound(v_, dim_);
  }
}

InvarianceCheck check_invariance(const InteractionSpec& spec, const GroupElement& g, std::size_t samples, double tol,
                                 Stream& rng) {
  const std::size_t d = spec.dim();
  if (g.dim() != d) fail(ErrorCode::DimensionMismatch, "group element dimension differs from the torus");
  InvarianceCheck out;
  TorusPoint x(d), y(d);
  for (std::size_t s = 0; s < samples; ++s) {
    for (auto& w : x.words()) w = rng();
    for (auto& w : y.words()) w = rng();
    const TorusPoint gx = apply_group_point(g, x), gy = apply_group_point(g, y);
    out.max_deviation_u = std::max(out.max_deviation_u, std::abs(spec.u()(gx.words().data(), d) - spec.u()(x.words().data(), d)));
    out.max_deviation_v = std::max(out.max_deviation_v, std::abs(spec.v()(gx.words().data(), gy.words().data(), d) -
                                                                 spec.v()(x.words().data(), y.words().data(), d)));
  }
  out.pass = out.max_deviation() < tol;
  return out;
}

std::vector<double> trapezoid_weights(const DiscretizedPath& path) {
  const std::size_t L = path.slices();
  std::vector<double> w(L + 1, path.step());
  if (path.is_loop()) {
    w[L] = 0.0;
  } else {
    w[0] *= 0.5;
    w[L] *= 0.5;
  }
  return w;
}

double self_energy(const DiscretizedPath& path, const InteractionSpec& spec) {
  const auto& u = spec.u();
  if (u.kind == PotentialU::Kind::Zero) return 0.0;
  const std::size_t L = path.slices(), d = path.dim();
  double acc = 0.0;
  if (path.is_loop()) {
    for (std::size_t s = 0; s < L; ++s) acc += u(path.slice(s), d);
  } else {
    for (std::size_t s = 1; s < L; ++s) acc += u(path.slice(s), d);
    acc += 0.5 * (u(path.slice(0), d) + u(path.slice(L), d));
  }
  return acc * path.step();
}

double pair_energy(const DiscretizedPath& path_i, const DiscretizedPath& path_j, std::uint32_t dist,
                   const InteractionSpec& spec) {
  check_same_grid(path_i, path_j);
  if (dist == 0) fail(ErrorCode::ZeroDistance, "pair terms need distinct vertices");
  const double coupling = spec.j()(static_cast<double>(dist));
  if (coupling == 0.0 || spec.v().kind == PotentialV::Kind::Zero) return 0.0;
  return coupling * integrate_v(path_i, path_j, spec.v());
}

double field_energy(const DiscretizedPath& path, const TorusPoint& x, std::uint32_t dist, const InteractionSpec& spec) {
  if (x.dim() != path.dim()) fail(ErrorCode::DimensionMismatch, "boundary point dimension differs from the path");
  if (dist == 0) fail(ErrorCode::ZeroDistance, "field terms need distinct vertices");
  const double coupling = spec.j()(static_cast<double>(dist));
  if (coupling == 0.0 || spec.v().kind == PotentialV::Kind::Zero) return 0.0;
  return coupling * integrate_field(path, x.words().data(), spec.v());
}

double EnergyBreakdown::sum_of_parts() const {
  double s = 0.0;
  for (const auto& [k, v] : self_terms) s += v;
  for (const auto& [k, v] : pair_terms) s += v;
  for (const auto& [k, v] : boundary_terms) s += v;
  return s;
}

EnergyBreakdown config_energy(const LoopConfiguration& loops, const DistanceOracle& geometry, const InteractionSpec& spec) {
  EnergyBreakdown out;
  const auto& vs = loops.vertices();
  for (std::size_t a = 0; a < vs.size(); ++a) {
    const double e = self_energy(loops.paths()[a], spec);
    out.self_terms[vs[a]] = e;
    out.total += e;
  }
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (std::size_t b = 0; b < vs.size(); ++b) {
      if (a == b) continue;
      const auto d = geometry.distance(vs[a], vs[b]);
      if (spec.j()(static_cast<double>(d)) == 0.0) continue;
      const double e = pair_energy(loops.paths()[a], loops.paths()[b], d, spec);
      out.pair_terms[{vs[a], vs[b]}] = e;
      out.total += e;
    }
  return out;
}

BoundaryEnergy boundary_energy(const LoopConfiguration& loops, const ClassicalBoundary& boundary,
                               const DistanceOracle& geometry, const InteractionSpec& spec, std::uint32_t radius) {
  BoundaryEnergy out;
  out.breakdown = config_energy(loops, geometry, spec);
  out.value = out.breakdown.total;
  for (const auto& [b, x] : boundary.points())
    if (loops.contains(b)) fail(ErrorCode::OverlappingSupports, "boundary vertex " + std::to_string(b) + " carries a loop");
  for (std::size_t a = 0; a < loops.size(); ++a) {
    const auto v = loops.vertices()[a];
    for (const auto& [b, x] : boundary.points()) {
      const auto d = geometry.distance(v, b);
      const double coupling = spec.j()(static_cast<double>(d));
      if (coupling == 0.0) continue;
      if (d > radius) {
        out.tail_bound += std::abs(coupling) * loops.beta() * spec.v_bar();
        continue;
      }
      const double e = field_energy(loops.paths()[a], x, d, spec);
      out.breakdown.boundary_terms[{v, b}] = e;
      out.value += e;
    }
  }
  out.breakdown.total = out.value;
  return out;
}

double conditional_energy(const LoopConfiguration& inner, const LoopConfiguration& outer, const ClassicalBoundary* boundary,
                          const DistanceOracle& geometry, const InteractionSpec& spec) {
  for (auto v : inner.vertices()) {
    if (outer.contains(v)) fail(ErrorCode::OverlappingSupports, "vertex " + std::to_string(v) + " in inner and outer");
    if (boundary && boundary->contains(v)) fail(ErrorCode::OverlappingSupports, "vertex " + std::to_string(v) + " on the boundary");
  }
  double h = 0.0;
  const auto& iv = inner.vertices();
  for (std::size_t a = 0; a < iv.size(); ++a) {
    h += self_energy(inner.paths()[a], spec);
    for (std::size_t b = 0; b < iv.size(); ++b)
      if (a != b) h += pair_energy(inner.paths()[a], inner.paths()[b], geometry.distance(iv[a], iv[b]), spec);
    for (std::size_t e = 0; e < outer.size(); ++e) {
      const auto d = geometry.distance(iv[a], outer.vertices()[e]);
      h += pair_energy(inner.paths()[a], outer.paths()[e], d, spec) + pair_energy(outer.paths()[e], inner.paths()[a], d, spec);
    }
    if (boundary)
      for (const auto& [b, x] : boundary->points()) h += field_energy(inner.paths()[a], x, geometry.distance(iv[a], b), spec);
  }
  return h;
}

double energy_bound(const InteractionSpec& spec, double beta, double coupling, std::size_t count) {
  return beta * (spec.u_bar() + coupling * spec.v_bar()) * static_cast<double>(count);
}

}  // namespace lfk
