#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorentzfk/exact.hpp"
#include "lorentzfk/fk_gibbs.hpp"

namespace lfk {

/// 1 for u <= 2, 1 / (u ln u) beyond; the jump at u = 2 is kept.
double z_fn(double u) noexcept;
/// Integral of z over (0, b]. Throws NonpositiveB.
double big_q(double b);
/// 1 for a <= 0, (Q(b) - Q(a)) / Q(b) for 0 < a < b, 0 for a >= b.
/// Throws NonpositiveB.
double theta_fn(double a, double b);

/// Which distance to the root feeds the profile.
enum class ProfileDistance { Graph, Height };

struct TunedSchedule {
  GroupElement g;
  std::uint32_t n = 0;        // window level
  std::uint32_t r_bar = 1;
  std::uint32_t n_prime = 2;
  ProfileDistance distance = ProfileDistance::Graph;

  /// Throws ConfigInvalid unless n < r_bar < n_prime.
  void validate() const;
};

/// gamma(n', k): exactly 1 for k <= r_bar and exactly 0 for k >= n'.
double gamma_profile(const TunedSchedule& schedule, std::int64_t k);

/// gamma(n', k_j) for every vertex j of the geometry.
std::vector<double> vertex_multipliers(const TunedSchedule& schedule, const DistanceOracle& geometry);
/// Vertex j -> g with parameter theta gamma(n', k_j).
std::vector<GroupElement> build_tuned_action(const TunedSchedule& schedule, const DistanceOracle& geometry);

/// Applies the tuned action (or its inverse) to every path of `config`.
LoopConfiguration apply_tuned(const GroupElement& g, const std::vector<double>& multipliers,
                              const LoopConfiguration& config, bool inverse = false);

struct TaylorGap {
  double gap = 0.0;
  /// |theta A|^2 |gamma_i - gamma_j|^2 V-bar: the bound with unit constant.
  double unit_bound = 0.0;
};

/// sup over slices of |V(g_i a, g_j b) + V(g_i^-1 a, g_j^-1 b) - 2 V(a, b)|.
TaylorGap taylor_gap(const InteractionSpec& spec, const DiscretizedPath& a, const DiscretizedPath& b, double gamma_i,
                     double gamma_j, const GroupElement& g);

struct TaylorFit {
  double constant = 0.0;  // sup gap / unit bound
  double first_half = 0.0;
  double second_half = 0.0;
  std::size_t pairs = 0;
};

/// Empirical constant over random loop pairs and multipliers.
TaylorFit fit_taylor_constant(const InteractionSpec& spec, const GroupElement& g, double beta, std::size_t slices,
                              std::size_t pairs, Stream& rng);

/// Analytic Taylor constant for the built-in pair potentials (1, given how
/// V-bar is formed); nullopt for custom ones.
std::optional<double> analytic_taylor_constant(const InteractionSpec& spec);

struct PhiValue {
  double value = 0.0;
  double tail_bound = 0.0;
  std::size_t sources = 0;
};

/// |theta|^2 sum over j in V_n, j' in V of J(d) |gamma_j - gamma_j'|^2, with
/// pairs beyond `radius` and vertices above the geometry bounded by majorants.
PhiValue phi_series(const TunedSchedule& schedule, const DistanceOracle& geometry, const Decay& j,
                    std::uint32_t radius = DistanceOracle::kUnreachable);

/// The same sum over all ordered pairs with at least one end in V_{n'}: the
/// cost that bounds the convexity gap. Throws TooLarge beyond `max_sources`
/// source vertices.
PhiValue phi_certificate(const TunedSchedule& schedule, const DistanceOracle& geometry, const Decay& j,
                         std::size_t max_sources = 1u << 16);

/// Brute-force double sum over every vertex pair of the geometry (no tail).
double phi_double_sum(const TunedSchedule& schedule, const DistanceOracle& geometry, const Decay& j);

struct PhiDecayFit {
  std::vector<std::uint32_t> n_primes;
  std::vector<double> phis;
  std::vector<double> scaled;       // phi Q(n' - r_bar)
  double slope = 0.0;               // least squares phi ~ slope / Q
  double residual = 0.0;            // rms relative residual of that fit
  double ratio = 0.0;               // max / min of the scaled values
  double trend = 0.0;               // slope of scaled against ln n'
  bool degenerate = false;          // all phi zero
  bool bounded = false;             // ratio below the limit
  bool nonincreasing = false;       // trend <= tolerance
};

/// Throws NotEnoughPoints for fewer than 5 values.
PhiDecayFit phi_decay_fit(const std::vector<std::uint32_t>& n_primes, const std::vector<double>& phis,
                          std::uint32_t r_bar, double ratio_limit = 5.0);

/// a exp(-C phi / 2).
double certified_margin(double a, double constant, double phi) noexcept;
/// beta times the Taylor constant times V-bar.
double convexity_constant(const InteractionSpec& spec, double beta, double taylor_constant);

struct ConvexityReport {
  std::size_t samples = 0;
  std::size_t satisfied = 0;
  double fraction = 0.0;
  /// log of (a/2)(e^{-h+} + e^{-h-}) / e^{-h}; the inequality holds iff >= 0.
  double min_log_margin = 0.0;
  double mean_log_margin = 0.0;
  /// max over samples of (h+ + h-) / 2 - h.
  double max_half_gap = 0.0;
};

/// Evaluates the three conditional energies of V_{n'} given the rest (and
/// the boundary) on each configuration.
ConvexityReport convexity_check(const std::vector<LoopConfiguration>& samples, const ClassicalBoundary& boundary,
                                const TunedSchedule& schedule, const DistanceOracle& geometry,
                                const InteractionSpec& spec, double a);

/// Snapshots of the chain every `thin` sweeps with the window loops replaced
/// by free bridges between uniform endpoints.
std::vector<LoopConfiguration> sample_window_configurations(GibbsSampler& chain, const std::vector<std::uint32_t>& window,
                                                            std::size_t count, std::size_t thin, Stream& rng);

struct KernelGap {
  double gap = 0.0;
  double sigma = 0.0;     // combined error at the maximizing pair
  double max_z = 0.0;     // max |difference| / combined error
  std::size_t compared = 0;
};

/// max |F(x - m, y - m) - F(x, y)| over the pairs whose shifted partner is
/// present; m is a grid shift applied to every window coordinate.
KernelGap kernel_transport_gap(const RdmKernelEstimate& est, std::size_t shift_steps);

struct RatioGap {
  double ratio = 1.0;
  double std_error = 0.0;
  double gap() const noexcept { return std::abs(ratio - 1.0); }
};

/// q(g w | exterior) / q(w | exterior) for window paths w: the chain holds
/// the window (frozen, bridges), V_{n'} minus the window (free) and the
/// exterior (frozen). Averages exp(-(h(g w v tuned) - h(w v))) over the free
/// part, which the tuned map leaves invariant.
RatioGap ratio_gap(GibbsSampler& chain, const TunedSchedule& schedule, const DistanceOracle& geometry,
                   std::size_t samples, std::size_t thin);

struct GapPoint {
  std::uint32_t volume_level = 0;
  double gap_kernel = 0.0;
  double trace = 0.0;
};

/// Brute-force kernel transport gap at window V_n for volumes V_N, with
/// optional classical spins on level N + 1.
std::vector<GapPoint> invariance_gap(const DistanceOracle& geometry, const InteractionSpec& spec, std::uint32_t window_level,
                                     const std::vector<std::uint32_t>& volume_levels,
                                     const std::optional<TorusPoint>& boundary_spin, const GridParams& params,
                                     std::size_t shift_steps);

/// Vertices on levels <= level, ascending.
std::vector<std::uint32_t> vertices_up_to(const DistanceOracle& geometry, std::uint32_t level);
std::vector<std::uint32_t> vertices_on(const DistanceOracle& geometry, std::uint32_t level);

struct LipschitzReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double max_excess = 0.0;  // largest amount by which a side was violated
  double min_slack = 0.0;   // smallest slack over all checked pairs
};

/// Exhaustive check over all vertex pairs with k <= k' of
/// 0 <= gamma(k) - gamma(k') <= d(j, j') z(k - r_bar) / Q(n' - r_bar).
LipschitzReport lipschitz_check(const TunedSchedule& schedule, const DistanceOracle& geometry);

}  // namespace lfk
