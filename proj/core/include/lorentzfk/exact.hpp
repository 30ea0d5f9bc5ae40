#pragma once

#include <cstdint>
#include <vector>

#include "lorentzfk/fk_gibbs.hpp"

namespace lfk {

/// Discretization of the brute-force ensembles (d = 1): G grid points with
/// weight 1/G, L time steps of length beta / L.
struct GridParams {
  std::size_t grid = 16;
  std::size_t slices = 4;
  double beta = 1.0;
};

struct ExactProblem {
  std::vector<std::uint32_t> volume;
  std::vector<std::uint32_t> window;
  ClassicalBoundary boundary;
};

enum class ExactEngine {
  Auto,
  /// Transfer over time slices on the G^#V joint spin grid.
  TimeSlice,
  /// Transfer over the vertices of a nearest-neighbour chain on the G^L loop
  /// grid, window = one chain end.
  Chain,
};

/// Operation count of an engine for a problem, used as feasibility guard.
double exact_cost(const ExactProblem& problem, const DistanceOracle& geometry, const InteractionSpec& spec,
                  const GridParams& params, ExactEngine engine);
/// Chain order of the volume starting at the window vertex when the couplings
/// form a path, empty otherwise.
std::vector<std::uint32_t> chain_order(const ExactProblem& problem, const DistanceOracle& geometry,
                                       const InteractionSpec& spec);

constexpr double kExactCostLimit = 6e9;

/// Exact grid-level reduced density kernel on the full window grid, normalized
/// by the same-grid partition sum. Throws TooLarge when the chosen engine
/// exceeds kExactCostLimit, DimensionMismatch unless d = 1.
RdmKernelEstimate brute_force_rdmk(const ExactProblem& problem, const DistanceOracle& geometry,
                                   const InteractionSpec& spec, const GridParams& params,
                                   ExactEngine engine = ExactEngine::Auto, double coupling = 0.0);

/// Grid-level Xi / Xi_free.
double brute_force_partition_ratio(const ExactProblem& problem, const DistanceOracle& geometry,
                                   const InteractionSpec& spec, const GridParams& params);

/// Grid-level partition sum Xi = sum_x G^-#V K(x, x) (time-slice engine).
double brute_force_partition(const ExactProblem& problem, const DistanceOracle& geometry, const InteractionSpec& spec,
                             const GridParams& params);

/// Grid loop from slice indices z_0..z_{L-1} (closing at z_0).
DiscretizedPath grid_loop(const std::vector<std::size_t>& indices, std::size_t grid, double beta);
/// Reference weight of a grid loop: prod p^(beta/L)(z_s, z_s+1) G^-L.
double grid_loop_weight(const std::vector<std::size_t>& indices, std::size_t grid, double beta);

struct FkdlrParams {
  GridParams grid;
  std::size_t outer_tests = 4;
  std::size_t inner_tests = 4;
};

/// Max over random grid configurations of |p(inner | outer) - exp(-h(inner |
/// outer)) / Xi(outer)|: the left side conditions the joint density (full
/// energies and the time-slice partition sum), the right side uses
/// conditional energies. Throws TooLarge.
double fkdlr_residual(const ExactProblem& problem, const std::vector<std::uint32_t>& inner, const DistanceOracle& geometry,
                      const InteractionSpec& spec, const FkdlrParams& params, Stream& rng);

}  // namespace lfk
