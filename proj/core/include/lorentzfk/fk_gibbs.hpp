#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorentzfk/cdlt_graph.hpp"
#include "lorentzfk/interaction.hpp"
#include "lorentzfk/loops.hpp"

namespace lfk {

/// Couplings of a fixed vertex list (volume plus frozen vertices) against
/// itself and a classical boundary, precomputed once. All energies follow the
/// ordered double sum: an unordered pair (i, k) contributes
/// J (int V(w_i, w_k) + int V(w_k, w_i)); boundary fields enter once.
class EnergyModel {
 public:
  EnergyModel(const DistanceOracle& geometry, const InteractionSpec& spec, std::vector<std::uint32_t> vertices,
              const ClassicalBoundary& boundary = {});

  const std::vector<std::uint32_t>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  /// Position of `vertex` in vertices(); throws UnknownVertex.
  std::size_t index_of(std::uint32_t vertex) const;
  double coupling(std::size_t i, std::size_t k) const noexcept { return couplings_[i * size() + k]; }
  const InteractionSpec& spec() const noexcept { return spec_; }

  /// Self term plus boundary field of a path placed at index i.
  double site(std::size_t i, const DiscretizedPath& path) const;
  /// Both ordered pair terms between paths placed at i and k.
  double pair(std::size_t i, std::size_t k, const DiscretizedPath& a, const DiscretizedPath& b) const;
  /// Conditional energy of `path` at index i given the others (null entries
  /// are absent).
  double local(std::size_t i, const DiscretizedPath& path, const std::vector<const DiscretizedPath*>& paths) const;
  /// Conditional energy of the indices in `subset` given every other present
  /// path.
  double subset(const std::vector<std::size_t>& subset, const std::vector<const DiscretizedPath*>& paths) const;
  double total(const std::vector<const DiscretizedPath*>& paths) const;

 private:
  InteractionSpec spec_;
  std::vector<std::uint32_t> vertices_;
  std::vector<double> couplings_;
  std::vector<std::vector<std::pair<double, TorusPoint>>> fields_;
};

struct SamplerOptions {
  /// Probability of a segment move; full-loop redraws otherwise.
  double segment_probability = 0.8;
  /// Segment length as a fraction of beta (at least two steps).
  double segment_fraction = 0.25;
  /// Energy cache revalidation period in sweeps.
  std::size_t revalidate_every = 64;
  /// Assert |local energy| <= beta (U-bar + coupling V-bar) on every step.
  bool check_energy_bounds = false;
  double coupling = 0.0;
};

struct AcceptanceStats {
  std::uint64_t segment_proposed = 0;
  std::uint64_t segment_accepted = 0;
  std::uint64_t full_proposed = 0;
  std::uint64_t full_accepted = 0;
  double rate() const noexcept;
};

/// Metropolis chain targeting exp(-h(config | frozen, boundary)) relative to
/// the free loop measure. Frozen vertices keep their paths (loops or bridges)
/// and act as exterior conditions.
class GibbsSampler {
 public:
  /// `initial` holds every free and frozen path; throws MismatchedPaths when
  /// a free path is not a loop and OverlappingSupports when the boundary
  /// meets the configuration.
  GibbsSampler(const DistanceOracle& geometry, const InteractionSpec& spec, LoopConfiguration initial,
               Stream rng, std::vector<std::uint32_t> frozen = {}, ClassicalBoundary boundary = {},
               SamplerOptions options = {});

  /// One proposal per free vertex, in vertex order.
  void sweep();
  void sweeps(std::size_t count) {
    for (std::size_t s = 0; s < count; ++s) sweep();
  }
  /// One proposal at free vertex position `free_index`; returns acceptance.
  bool step(std::size_t free_index);

  const LoopConfiguration& configuration() const noexcept { return config_; }
  /// Replaces the path of a frozen vertex and refreshes the energy cache.
  void set_frozen(std::uint32_t vertex, DiscretizedPath path);
  const std::vector<std::uint32_t>& free_vertices() const noexcept { return free_vertices_; }
  const ClassicalBoundary& boundary() const noexcept { return boundary_; }
  const EnergyModel& model() const noexcept { return model_; }
  double energy() const noexcept { return energy_; }
  double recompute_energy() const;
  std::uint64_t step_count() const noexcept { return steps_; }
  std::uint64_t sweep_count() const noexcept { return sweeps_; }
  const AcceptanceStats& stats() const noexcept { return stats_; }
  Stream& rng() noexcept { return rng_; }

 private:
  void refresh_pointers();

  LoopConfiguration config_;
  ClassicalBoundary boundary_;
  EnergyModel model_;
  SamplerOptions options_;
  Stream rng_;
  std::vector<std::uint32_t> free_vertices_;
  std::vector<std::size_t> free_index_;
  std::vector<const DiscretizedPath*> ptrs_;
  double energy_ = 0.0;
  std::uint64_t steps_ = 0;
  std::uint64_t sweeps_ = 0;
  AcceptanceStats stats_;
};

void metropolis_sweep(GibbsSampler& state);

/// One point of M per window vertex, in sorted window order.
using WindowPoint = std::vector<TorusPoint>;

/// Grid point with coordinates g / G on every axis.
TorusPoint grid_point(const std::vector<std::size_t>& index, std::size_t grid);

/// Kernel estimate on a list of (x, y) evaluation pairs.
struct RdmKernelEstimate {
  std::string method;              // "oracle" or "mc"
  std::vector<std::uint32_t> window;
  std::uint32_t level = 0;         // n: the window is V_n
  std::vector<WindowPoint> x_points;
  std::vector<WindowPoint> y_points;
  /// Grid coordinates (flattened window x dim) of each point, when on a grid.
  std::vector<std::vector<std::size_t>> x_grid;
  std::vector<std::vector<std::size_t>> y_grid;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<double> values;
  std::vector<double> std_errors;
  /// Per pair, the batch means behind the estimate (Monte Carlo only).
  std::vector<std::vector<double>> batch_means;
  std::uint64_t seed = 0;
  std::size_t slices = 0;
  std::size_t grid = 0;
  double beta = 0.0;
  /// exp[2 beta (U-bar + C V-bar) #window] and the number of values above it.
  double uniform_bound = 0.0;
  std::size_t bound_violations = 0;

  std::optional<double> value_at(std::size_t x, std::size_t y) const;
  /// Diagonal quadrature sum over x of F(x, x) G^-dims, for full-grid
  /// estimates; nullopt when the diagonal is incomplete.
  std::optional<double> trace() const;
  /// Smallest eigenvalue of the symmetrized quadrature matrix (full grids).
  std::optional<double> smallest_eigenvalue() const;
};

/// Counts estimate values above the uniform bound and stores both.
void apply_uniform_bound(RdmKernelEstimate& est, const InteractionSpec& spec, double coupling);

struct McRdmkParams {
  std::size_t samples = 4096;       // exterior samples
  std::size_t inner_samples = 64;   // bridges / loops per exterior sample
  std::size_t thin = 1;             // sweeps between exterior samples
  std::optional<std::size_t> burn_in;  // default 10 #V sweeps
  std::size_t batches = 32;
  double coupling = 0.0;            // effective constant for the uniform bound
  std::size_t grid = 0;             // nonzero: points lie on this grid
};

/// Average over exterior samples of the chain of the normalized window bridge
/// integral, each estimated by free importance sampling. The window may be
/// the whole volume. Throws WindowTooLarge, NotEnoughSamples.
RdmKernelEstimate estimate_rdmk_mc(GibbsSampler& chain, const std::vector<std::uint32_t>& window,
                                   const std::vector<WindowPoint>& x_points, const std::vector<WindowPoint>& y_points,
                                   const std::vector<std::pair<std::size_t, std::size_t>>& pairs, const McRdmkParams& params);

struct CompatibilityReport {
  double max_deviation = 0.0;
  double max_sigma = 0.0;
  std::size_t compared = 0;
};

/// Partial trace over the extra window vertices of `fine`, compared with
/// `coarse` at every coarse pair whose traced points `fine` holds. Errors of
/// traced sums add linearly. Throws GridMismatch.
CompatibilityReport compatibility_check(const RdmKernelEstimate& fine, const RdmKernelEstimate& coarse);

struct PartitionRatio {
  double ratio = 1.0;
  double std_error = 0.0;
  double ess = 0.0;
};

/// Xi / Xi_free = E_free[exp(-h)] over free loops on `volume`, optionally
/// conditioned on exterior loops and a classical boundary. Throws
/// DegenerateWeights when the effective sample size drops below 10.
PartitionRatio partition_ratio(const std::vector<std::uint32_t>& volume, const DistanceOracle& geometry,
                               const InteractionSpec& spec, double beta, std::size_t slices, std::size_t samples,
                               Stream& rng, const LoopConfiguration* exterior = nullptr,
                               const ClassicalBoundary* boundary = nullptr);

}  // namespace lfk
