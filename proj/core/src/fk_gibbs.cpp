#include "lorentzfk/fk_gibbs.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

constexpr double kDensityTol = 1e-15;

double integrate_pair(const DiscretizedPath& a, const DiscretizedPath& b, const PotentialV& v) {
  if (v.kind == PotentialV::Kind::Zero) return 0.0;
  if (v.kind == PotentialV::Kind::CosineDifference) return 2.0 * integrate_v(a, b, v);
  return integrate_v(a, b, v) + integrate_v(b, a, v);
}

struct BatchMeans {
  std::vector<double> sums;
  std::size_t batch = 1;
  double mean() const {
    double s = 0.0;
    for (double x : sums) s += x;
    return s / static_cast<double>(sums.size() * batch);
  }
  double std_error() const {
    const double m = mean();
    const double b = static_cast<double>(sums.size());
    double ss = 0.0;
    for (double x : sums) {
      const double d = x / static_cast<double>(batch) - m;
      ss += d * d;
    }
    return std::sqrt(ss / (b - 1.0) / b);
  }
};

}  // namespace

EnergyModel::EnergyModel(const DistanceOracle& geometry, const InteractionSpec& spec, std::vector<std::uint32_t> vertices,
                         const ClassicalBoundary& boundary)
    : spec_(spec), vertices_(std::move(vertices)) {
  const std::size_t n = vertices_.size();
  couplings_.assign(n * n, 0.0);
  fields_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (boundary.contains(vertices_[i]))
      fail(ErrorCode::OverlappingSupports, "boundary spin on vertex " + std::to_string(vertices_[i]));
    const auto dist = geometry.distances_from(vertices_[i]);
    for (std::size_t k = 0; k < n; ++k) {
      if (k == i) continue;
      const std::uint32_t d = (*dist)[vertices_[k]];
      if (d == 0) fail(ErrorCode::ZeroDistance, "repeated vertex " + std::to_string(vertices_[k]));
      if (d != DistanceOracle::kUnreachable) couplings_[i * n + k] = spec.j()(static_cast<double>(d));
    }
    for (const auto& [b, x] : boundary.points()) {
      if (x.dim() != spec.dim()) fail(ErrorCode::DimensionMismatch, "boundary point dimension");
      const std::uint32_t d = (*dist)[b];
      if (d == DistanceOracle::kUnreachable) continue;
      const double c = spec.j()(static_cast<double>(d));
      if (c != 0.0) fields_[i].emplace_back(c, x);
    }
  }
}

std::size_t EnergyModel::index_of(std::uint32_t vertex) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i] == vertex) return i;
  fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(vertex) + " not in the model");
}

double EnergyModel::site(std::size_t i, const DiscretizedPath& path) const {
  double e = self_energy(path, spec_);
  if (spec_.v().kind == PotentialV::Kind::Zero) return e;
  for (const auto& [c, x] : fields_[i]) e += c * integrate_field(path, x.words().data(), spec_.v());
  return e;
}

double EnergyModel::pair(std::size_t i, std::size_t k, const DiscretizedPath& a, const DiscretizedPath& b) const {
  const double c = coupling(i, k);
  if (c == 0.0) return 0.0;
  return c * integrate_pair(a, b, spec_.v());
}

double EnergyModel::local(std::size_t i, const DiscretizedPath& path, const std::vector<const DiscretizedPath*>& paths) const {
  double e = site(i, path);
  for (std::size_t k = 0; k < paths.size(); ++k)
    if (k != i && paths[k] != nullptr) e += pair(i, k, path, *paths[k]);
  return e;
}

double EnergyModel::subset(const std::vector<std::size_t>& subset, const std::vector<const DiscretizedPath*>& paths) const {
  std::vector<char> in(paths.size(), 0);
  for (std::size_t i : subset) in[i] = 1;
  double e = 0.0;
  for (std::size_t i : subset) {
    e += site(i, *paths[i]);
    for (std::size_t k = 0; k < paths.size(); ++k) {
      if (k == i || paths[k] == nullptr) continue;
      if (in[k] && k < i) continue;
      e += pair(i, k, *paths[i], *paths[k]);
    }
  }
  return e;
}

double EnergyModel::total(const std::vector<const DiscretizedPath*>& paths) const {
  std::vector<std::size_t> all;
  for (std::size_t i = 0; i < paths.size(); ++i)
    if (paths[i] != nullptr) all.push_back(i);
  return subset(all, paths);
}

double AcceptanceStats::rate() const noexcept {
  const auto p = segment_proposed + full_proposed;
  return p == 0 ? 0.0 : static_cast<double>(segment_accepted + full_accepted) / static_cast<double>(p);
}

GibbsSampler::GibbsSampler(const DistanceOracle& geometry, const InteractionSpec& spec, LoopConfiguration initial,
                           Stream rng, std::vector<std::uint32_t> frozen, ClassicalBoundary boundary, SamplerOptions options)
    : config_(std::move(initial)),
      boundary_(std::move(boundary)),
      model_(geometry, spec, config_.vertices(), boundary_),
      options_(options),
      rng_(rng) {
  if (config_.dim() != spec.dim()) fail(ErrorCode::DimensionMismatch, "configuration and spec dimensions differ");
  std::sort(frozen.begin(), frozen.end());
  for (auto v : frozen)
    if (!config_.contains(v)) fail(ErrorCode::UnknownVertex, "frozen vertex " + std::to_string(v) + " has no path");
  const auto& vs = config_.vertices();
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (std::binary_search(frozen.begin(), frozen.end(), vs[i])) continue;
    if (!config_.paths()[i].is_loop()) fail(ErrorCode::MismatchedPaths, "free vertex " + std::to_string(vs[i]) + " holds a bridge");
    free_vertices_.push_back(vs[i]);
    free_index_.push_back(i);
  }
  refresh_pointers();
  energy_ = recompute_energy();
}

void GibbsSampler::refresh_pointers() {
  ptrs_.clear();
  for (const auto& p : config_.paths()) ptrs_.push_back(&p);
}

double GibbsSampler::recompute_energy() const { return model_.subset(free_index_, ptrs_); }

void GibbsSampler::set_frozen(std::uint32_t vertex, DiscretizedPath path) {
  if (std::find(free_vertices_.begin(), free_vertices_.end(), vertex) != free_vertices_.end())
    fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(vertex) + " is not frozen");
  if (!config_.contains(vertex)) fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(vertex) + " has no path");
  config_.set(vertex, std::move(path));
  refresh_pointers();
  energy_ = recompute_energy();
}

bool GibbsSampler::step(std::size_t free_index) {
  const std::size_t i = free_index_.at(free_index);
  DiscretizedPath& current = config_.paths()[i];
  const std::size_t L = current.slices();
  DiscretizedPath proposal = current;
  const bool segment = L >= 2 && rng_.uniform() < options_.segment_probability;
  if (segment) {
    auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(L) * options_.segment_fraction));
    m = std::min(std::max<std::size_t>(m, 2), L);
    resample_segment(proposal, static_cast<std::size_t>(rng_.below(L)), m, rng_);
    ++stats_.segment_proposed;
  } else {
    TorusPoint x(current.dim());
    for (auto& w : x.words()) w = rng_();
    proposal = sample_loop(x, current.beta(), L, rng_);
    ++stats_.full_proposed;
  }
  const double before = model_.local(i, current, ptrs_);
  const double after = model_.local(i, proposal, ptrs_);
  if (options_.check_energy_bounds) {
    const double bound = energy_bound(model_.spec(), current.beta(), options_.coupling, 1) * (1.0 + 1e-9) + 1e-12;
    if (std::abs(after) > bound)
      fail(ErrorCode::NumericalFailure, "local energy " + std::to_string(after) + " exceeds bound " + std::to_string(bound));
  }
  const double delta = after - before;
  ++steps_;
  const bool accept = delta <= 0.0 || rng_.uniform() < std::exp(-delta);
  if (accept) {
    current = std::move(proposal);
    energy_ += delta;
    if (segment) ++stats_.segment_accepted;
    else ++stats_.full_accepted;
  }
  return accept;
}

void GibbsSampler::sweep() {
  for (std::size_t f = 0; f < free_index_.size(); ++f) step(f);
  ++sweeps_;
  if (options_.revalidate_every != 0 && sweeps_ % options_.revalidate_every == 0) {
    const double fresh = recompute_energy();
    if (std::abs(fresh - energy_) > 1e-8 * std::max(1.0, std::abs(fresh)))
      fail(ErrorCode::NumericalFailure, "energy cache drifted: " + std::to_string(energy_) + " vs " + std::to_string(fresh));
    energy_ = fresh;
  }
}

void metropolis_sweep(GibbsSampler& state) { state.sweep(); }

TorusPoint grid_point(const std::vector<std::size_t>& index, std::size_t grid) {
  std::vector<Word> w;
  for (auto g : index) w.push_back(unit_to_word(static_cast<double>(g % grid) / static_cast<double>(grid)));
  return TorusPoint::from_words(std::move(w));
}

std::optional<double> RdmKernelEstimate::value_at(std::size_t x, std::size_t y) const {
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (pairs[p].first == x && pairs[p].second == y) return values[p];
  return std::nullopt;
}

namespace {

std::size_t grid_dims(const RdmKernelEstimate& est) {
  if (est.x_grid.empty()) return 0;
  return est.x_grid.front().size();
}

double grid_volume(std::size_t grid, std::size_t dims) { return std::pow(static_cast<double>(grid), static_cast<double>(dims)); }

}  // namespace

std::optional<double> RdmKernelEstimate::trace() const {
  if (grid == 0 || x_grid.size() != x_points.size() || y_grid.size() != y_points.size() || x_grid.empty())
    return std::nullopt;
  const std::size_t dims = grid_dims(*this);
  std::map<std::vector<std::size_t>, double> diag;
  for (std::size_t p = 0; p < pairs.size(); ++p)
    if (x_grid[pairs[p].first] == y_grid[pairs[p].second]) diag[x_grid[pairs[p].first]] = values[p];
  const double vol = grid_volume(grid, dims);
  if (static_cast<double>(diag.size()) != vol) return std::nullopt;
  double s = 0.0;
  for (const auto& [k, v] : diag) s += v;
  return s / vol;
}

std::optional<double> RdmKernelEstimate::smallest_eigenvalue() const {
  if (grid == 0 || x_grid.size() != x_points.size() || x_grid.empty()) return std::nullopt;
  const std::size_t dims = grid_dims(*this);
  const double vol = grid_volume(grid, dims);
  if (x_points.size() != static_cast<std::size_t>(vol) || y_points.size() != x_points.size() ||
      pairs.size() != x_points.size() * y_points.size())
    return std::nullopt;
  std::map<std::vector<std::size_t>, Eigen::Index> yindex;
  for (std::size_t b = 0; b < y_grid.size(); ++b) yindex[y_grid[b]] = static_cast<Eigen::Index>(b);
  const auto n = static_cast<Eigen::Index>(x_points.size());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Index> row(x_grid.size());
  for (std::size_t a = 0; a < x_grid.size(); ++a) {
    auto it = yindex.find(x_grid[a]);
    if (it == yindex.end()) return std::nullopt;
    row[a] = it->second;
  }
  for (std::size_t p = 0; p < pairs.size(); ++p)
    k(row[pairs[p].first], static_cast<Eigen::Index>(pairs[p].second)) = values[p] / vol;
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void apply_uniform_bound(RdmKernelEstimate& est, const InteractionSpec& spec, double coupling) {
  est.uniform_bound = std::exp(2.0 * energy_bound(spec, est.beta, coupling, est.window.size()));
  est.bound_violations = 0;
  for (double v : est.values)
    if (!(v <= est.uniform_bound)) ++est.bound_violations;
}

RdmKernelEstimate estimate_rdmk_mc(GibbsSampler& chain, const std::vector<std::uint32_t>& window,
                                   const std::vector<WindowPoint>& x_points, const std::vector<WindowPoint>& y_points,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const McRdmkParams& params) {
  std::vector<std::uint32_t> win = window;
  std::sort(win.begin(), win.end());
  win.erase(std::unique(win.begin(), win.end()), win.end());
  if (win.empty()) fail(ErrorCode::WindowTooLarge, "empty window");
  const auto& free = chain.free_vertices();
  for (auto v : win)
    if (std::find(free.begin(), free.end(), v) == free.end())
      fail(ErrorCode::WindowTooLarge, "window vertex " + std::to_string(v) + " is not in the sampled volume");
  if (params.batches < 2 || params.samples < 2 * params.batches || params.inner_samples == 0)
    fail(ErrorCode::NotEnoughSamples, "need at least two samples per batch and one inner sample");
  const std::size_t nw = win.size();
  const std::size_t d = chain.configuration().dim();
  for (const auto* list : {&x_points, &y_points})
    for (const auto& pt : *list) {
      if (pt.size() != nw) fail(ErrorCode::DimensionMismatch, "evaluation point needs one torus point per window vertex");
      for (const auto& q : pt)
        if (q.dim() != d) fail(ErrorCode::DimensionMismatch, "evaluation point dimension");
    }
  for (const auto& [a, b] : pairs)
    if (a >= x_points.size() || b >= y_points.size()) fail(ErrorCode::DimensionMismatch, "pair index out of range");

  const double beta = chain.configuration().beta();
  const std::size_t L = chain.configuration().slices();
  const EnergyModel& model = chain.model();
  std::vector<std::size_t> widx;
  for (auto v : win) widx.push_back(model.index_of(v));

  std::vector<double> free_weight(pairs.size(), 1.0);
  for (std::size_t p = 0; p < pairs.size(); ++p)
    for (std::size_t j = 0; j < nw; ++j)
      free_weight[p] *= transition_density(x_points[pairs[p].first][j], y_points[pairs[p].second][j], beta, kDensityTol);
  const double diag_weight = std::pow(diagonal_density(beta, d, kDensityTol), static_cast<double>(nw));

  const std::size_t burn = params.burn_in.value_or(10 * model.size());
  chain.sweeps(burn);
  Stream rng = Stream::derive(chain.rng()(), "rdmk-inner");

  const std::size_t batch = params.samples / params.batches;
  std::vector<BatchMeans> acc(pairs.size());
  for (auto& a : acc) {
    a.sums.assign(params.batches, 0.0);
    a.batch = batch;
  }

  std::vector<const DiscretizedPath*> ptrs(model.size());
  std::vector<DiscretizedPath> trial(nw);
  const std::size_t den_samples = std::max(4 * params.inner_samples, pairs.size() * params.inner_samples / 2);
  for (std::size_t t = 0; t < batch * params.batches; ++t) {
    chain.sweeps(std::max<std::size_t>(params.thin, 1));
    const auto& paths = chain.configuration().paths();
    for (std::size_t i = 0; i < ptrs.size(); ++i) ptrs[i] = &paths[i];
    for (std::size_t j = 0; j < nw; ++j) ptrs[widx[j]] = &trial[j];

    double den = 0.0, den2 = 0.0;
    for (std::size_t m = 0; m < den_samples; ++m) {
      for (std::size_t j = 0; j < nw; ++j) {
        TorusPoint x(d);
        for (auto& w : x.words()) w = rng();
        trial[j] = sample_loop(x, beta, L, rng);
      }
      const double w = std::exp(-model.subset(widx, ptrs));
      den += w;
      den2 += w * w;
    }
    // First-order correction of the bias of 1 / (sample mean).
    const double nd = static_cast<double>(den_samples);
    const double den_mean = den / nd;
    const double rel_var = std::max(0.0, den2 / nd - den_mean * den_mean) / (nd - 1.0) / (den_mean * den_mean);
    const double inv_den = (1.0 - rel_var) / (diag_weight * den_mean);

    for (std::size_t p = 0; p < pairs.size(); ++p) {
      double num = 0.0;
      for (std::size_t m = 0; m < params.inner_samples; ++m) {
        for (std::size_t j = 0; j < nw; ++j)
          trial[j] = sample_bridge(x_points[pairs[p].first][j], y_points[pairs[p].second][j], beta, L, rng);
        num += std::exp(-model.subset(widx, ptrs));
      }
      num = free_weight[p] * num / static_cast<double>(params.inner_samples);
      acc[p].sums[t / batch] += num * inv_den;
    }
  }

  RdmKernelEstimate est;
  est.method = "mc";
  est.window = win;
  est.x_points = x_points;
  est.y_points = y_points;
  est.pairs = pairs;
  est.slices = L;
  est.beta = beta;
  for (const auto& a : acc) {
    est.values.push_back(a.mean());
    est.std_errors.push_back(a.std_error());
    std::vector<double> means;
    for (double x : a.sums) means.push_back(x / static_cast<double>(a.batch));
    est.batch_means.push_back(std::move(means));
  }
  if (params.grid != 0) {
    est.grid = params.grid;
    auto locate = [&](const std::vector<WindowPoint>& pts, std::vector<std::vector<std::size_t>>& out) {
      for (const auto& pt : pts) {
        std::vector<std::size_t> idx;
        for (const auto& q : pt)
          for (std::size_t c = 0; c < d; ++c) {
            const double g = std::round(q.coord(c) * static_cast<double>(params.grid));
            const auto gi = static_cast<std::size_t>(g) % params.grid;
            if (q.words()[c] != unit_to_word(static_cast<double>(gi) / static_cast<double>(params.grid)))
              fail(ErrorCode::GridMismatch, "evaluation point is not on the grid");
            idx.push_back(gi);
          }
        out.push_back(std::move(idx));
      }
    };
    locate(x_points, est.x_grid);
    locate(y_points, est.y_grid);
  }
  apply_uniform_bound(est, model.spec(), params.coupling);
  return est;
}

CompatibilityReport compatibility_check(const RdmKernelEstimate& fine, const RdmKernelEstimate& coarse) {
  if (fine.grid == 0 || fine.grid != coarse.grid) fail(ErrorCode::GridMismatch, "estimates are on different grids");
  if (fine.x_grid.size() != fine.x_points.size() || coarse.x_grid.size() != coarse.x_points.size() ||
      fine.y_grid.size() != fine.y_points.size() || coarse.y_grid.size() != coarse.y_points.size())
    fail(ErrorCode::GridMismatch, "estimates lack grid coordinates");
  if (!std::includes(fine.window.begin(), fine.window.end(), coarse.window.begin(), coarse.window.end()))
    fail(ErrorCode::GridMismatch, "coarse window is not inside the fine window");
  const std::size_t d = coarse.x_points.empty() ? 1 : coarse.x_points.front().front().dim();
  std::vector<std::size_t> kept, traced;
  for (std::size_t j = 0; j < fine.window.size(); ++j) {
    const bool in = std::binary_search(coarse.window.begin(), coarse.window.end(), fine.window[j]);
    for (std::size_t c = 0; c < d; ++c) (in ? kept : traced).push_back(j * d + c);
  }
  // (kept x, kept y) -> sum over traced z of F((x, z), (y, z)) and its error.
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, std::pair<double, double>> sums;
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, std::size_t> counts;
  for (std::size_t p = 0; p < fine.pairs.size(); ++p) {
    const auto& xg = fine.x_grid[fine.pairs[p].first];
    const auto& yg = fine.y_grid[fine.pairs[p].second];
    bool diagonal = true;
    for (auto t : traced) diagonal = diagonal && xg[t] == yg[t];
    if (!diagonal) continue;
    std::vector<std::size_t> xk, yk;
    for (auto k : kept) {
      xk.push_back(xg[k]);
      yk.push_back(yg[k]);
    }
    auto& s = sums[{xk, yk}];
    s.first += fine.values[p];
    s.second += fine.std_errors.empty() ? 0.0 : fine.std_errors[p];
    ++counts[{xk, yk}];
  }
  const double vol = grid_volume(fine.grid, traced.size());
  CompatibilityReport rep;
  for (std::size_t p = 0; p < coarse.pairs.size(); ++p) {
    const std::pair key{coarse.x_grid[coarse.pairs[p].first], coarse.y_grid[coarse.pairs[p].second]};
    auto it = sums.find(key);
    if (it == sums.end()) continue;
    if (static_cast<double>(counts[key]) != vol)
      fail(ErrorCode::GridMismatch, "fine estimate lacks some traced points of a coarse pair");
    const double traced_value = it->second.first / vol;
    const double traced_err = it->second.second / vol;
    const double coarse_err = coarse.std_errors.empty() ? 0.0 : coarse.std_errors[p];
    const double dev = std::abs(traced_value - coarse.values[p]);
    const double sigma = std::sqrt(traced_err * traced_err + coarse_err * coarse_err);
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (sigma > 0.0) rep.max_sigma = std::max(rep.max_sigma, dev / sigma);
    ++rep.compared;
  }
  if (rep.compared == 0) fail(ErrorCode::GridMismatch, "no coarse pair has a traced counterpart");
  return rep;
}

PartitionRatio partition_ratio(const std::vector<std::uint32_t>& volume, const DistanceOracle& geometry,
                               const InteractionSpec& spec, double beta, std::size_t slices, std::size_t samples,
                               Stream& rng, const LoopConfiguration* exterior, const ClassicalBoundary* boundary) {
  if (volume.empty()) fail(ErrorCode::EmptyInput, "empty volume");
  if (samples < 2) fail(ErrorCode::NotEnoughSamples, "need at least two samples");
  std::vector<std::uint32_t> vs = volume;
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  std::vector<std::uint32_t> all = vs;
  if (exterior != nullptr)
    for (auto v : exterior->vertices()) {
      if (std::binary_search(vs.begin(), vs.end(), v)) fail(ErrorCode::OverlappingSupports, "exterior meets the volume");
      all.push_back(v);
    }
  const ClassicalBoundary none;
  const EnergyModel model(geometry, spec, all, boundary == nullptr ? none : *boundary);
  std::vector<std::size_t> inner(vs.size());
  for (std::size_t i = 0; i < vs.size(); ++i) inner[i] = i;
  std::vector<const DiscretizedPath*> ptrs(all.size(), nullptr);
  if (exterior != nullptr)
    for (std::size_t k = 0; k < exterior->size(); ++k) {
      const auto& p = exterior->paths()[k];
      if (p.beta() != beta || p.slices() != slices || p.dim() != spec.dim())
        fail(ErrorCode::MismatchedPaths, "exterior paths differ in beta, L or d");
      ptrs[vs.size() + k] = &p;
    }
  bool zero = spec.u().kind == PotentialU::Kind::Zero && (spec.v().kind == PotentialV::Kind::Zero || spec.j().is_zero());
  if (zero) return {1.0, 0.0, static_cast<double>(samples)};
  double s = 0.0, s2 = 0.0;
  std::vector<double> w(samples);
  std::vector<DiscretizedPath> ps(vs.size());
  for (std::size_t t = 0; t < samples; ++t) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
      TorusPoint x(spec.dim());
      for (auto& word : x.words()) word = rng();
      ps[i] = sample_loop(x, beta, slices, rng);
      ptrs[i] = &ps[i];
    }
    w[t] = std::exp(-model.subset(inner, ptrs));
    s += w[t];
    s2 += w[t] * w[t];
  }
  PartitionRatio out;
  const double n = static_cast<double>(samples);
  out.ratio = s / n;
  out.ess = s2 > 0.0 ? s * s / s2 : 0.0;
  double var = 0.0;
  for (double x : w) var += (x - out.ratio) * (x - out.ratio);
  out.std_error = std::sqrt(var / (n - 1.0) / n);
  if (!(out.ess >= 10.0)) fail(ErrorCode::DegenerateWeights, "effective sample size " + std::to_string(out.ess));
  return out;
}

}  // namespace lfk
