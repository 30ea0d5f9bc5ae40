#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lorentzfk/cdlt_graph.hpp"
#include "lorentzfk/decay.hpp"
#include "lorentzfk/loops.hpp"
#include "lorentzfk/torus_kernel.hpp"

namespace lfk {

/// Single-site potential U on the torus.
struct PotentialU {
  enum class Kind { Zero, Constant, Cosine, Custom };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  /// Cosine: U(x) = amplitude cos(2 pi mode . x).
  std::vector<int> mode;
  std::string name = "zero";
  std::function<double(std::span<const double>)> fn;

  static PotentialU zero() { return {}; }
  static PotentialU constant(double c);
  static PotentialU cosine(double amplitude, std::vector<int> mode);
  static PotentialU custom(std::string name, std::function<double(std::span<const double>)> fn);

  double operator()(const Word* x, std::size_t dim) const;
  /// Closed-form bound on |U| and |grad U|; nullopt for custom potentials.
  std::optional<double> closed_form_bound() const;
};

/// Pair potential V on the torus.
struct PotentialV {
  enum class Kind { Zero, CosineDifference, Custom };
  Kind kind = Kind::Zero;
  double amplitude = 0.0;
  /// CosineDifference: V(x, x') = amplitude cos(2 pi mode . (x - x')).
  std::vector<int> mode;
  std::string name = "zero";
  std::function<double(std::span<const double>, std::span<const double>)> fn;

  static PotentialV zero() { return {}; }
  static PotentialV cosine_difference(double amplitude, std::vector<int> mode);
  static PotentialV custom(std::string name, std::function<double(std::span<const double>, std::span<const double>)> fn);

  double operator()(const Word* a, const Word* b, std::size_t dim) const;
  /// Closed-form bound on |V| and its first and mixed second derivatives.
  std::optional<double> closed_form_bound() const;
  bool is_difference_kernel() const noexcept { return kind != Kind::Custom; }
};

/// Grid certification of the bound constants: values and finite-difference
/// derivatives on a grid of up to 2^12 points per dimension (2^22 in total),
/// inflated by half a grid step times the next derivative.
double certify_u_bound(const PotentialU& u, std::size_t dim);
double certify_v_bound(const PotentialV& v, std::size_t dim);

/// The triple (U, V, J) with bound constants. Closed-form bounds of the
/// built-ins, or caller-supplied ones, take precedence over grid estimates.
class InteractionSpec {
 public:
  InteractionSpec() : InteractionSpec(1, PotentialU::zero(), PotentialV::zero(), Decay::zero()) {}
  /// Throws InadmissibleJ, DimensionMismatch.
  InteractionSpec(std::size_t dim, PotentialU u, PotentialV v, Decay j, std::optional<double> u_bar = std::nullopt,
                  std::optional<double> v_bar = std::nullopt);

  std::size_t dim() const noexcept { return dim_; }
  const PotentialU& u() const noexcept { return u_; }
  const PotentialV& v() const noexcept { return v_; }
  const Decay& j() const noexcept { return j_; }
  double u_bar() const noexcept { return u_bar_; }
  double v_bar() const noexcept { return v_bar_; }

 private:
  std::size_t dim_;
  PotentialU u_;
  PotentialV v_;
  Decay j_;
  double u_bar_ = 0.0;
  double v_bar_ = 0.0;
};

struct InvarianceCheck {
  bool pass = true;
  double max_deviation_u = 0.0;
  double max_deviation_v = 0.0;
  double max_deviation() const noexcept { return std::max(max_deviation_u, max_deviation_v); }
};

/// Max of |U(gx) - U(x)| and |V(gx, gx') - V(x, x')| over sampled points.
InvarianceCheck check_invariance(const InteractionSpec& spec, const GroupElement& g, std::size_t samples, double tol,
                                 Stream& rng);

/// Trapezoid weights (times the time step) on the slice grid; for loops the
/// end slices merge into one full weight on slice 0.
std::vector<double> trapezoid_weights(const DiscretizedPath& path);

/// Trapezoid integral of V(a(tau), b(tau)); loops take the periodic rule.
double integrate_v(const DiscretizedPath& a, const DiscretizedPath& b, const PotentialV& v);
/// Trapezoid integral of V(a(tau), x).
double integrate_field(const DiscretizedPath& a, const Word* x, const PotentialV& v);

double self_energy(const DiscretizedPath& path, const InteractionSpec& spec);
/// J(dist) times the trapezoid integral of V(path_i, path_j). Throws
/// MismatchedPaths, ZeroDistance.
double pair_energy(const DiscretizedPath& path_i, const DiscretizedPath& path_j, std::uint32_t dist,
                   const InteractionSpec& spec);
/// J(dist) times the integral of V(path(tau), x).
double field_energy(const DiscretizedPath& path, const TorusPoint& x, std::uint32_t dist, const InteractionSpec& spec);

struct EnergyBreakdown {
  std::map<std::uint32_t, double> self_terms;
  /// Ordered pairs (i, i'), both directions present.
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> pair_terms;
  /// (interior vertex, exterior vertex).
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> boundary_terms;
  double total = 0.0;
  double sum_of_parts() const;
};

/// Self terms plus the ordered double sum of pair terms over the support.
EnergyBreakdown config_energy(const LoopConfiguration& loops, const DistanceOracle& geometry, const InteractionSpec& spec);

struct BoundaryEnergy {
  double value = 0.0;
  double tail_bound = 0.0;
  EnergyBreakdown breakdown;
};

/// config_energy plus each interior-exterior field term once; exterior
/// vertices farther than `radius` are dropped and bounded by |J(d)| beta V-bar.
/// Throws OverlappingSupports.
BoundaryEnergy boundary_energy(const LoopConfiguration& loops, const ClassicalBoundary& boundary,
                               const DistanceOracle& geometry, const InteractionSpec& spec,
                               std::uint32_t radius = DistanceOracle::kUnreachable);

/// h(inner v outer | boundary) - h(outer | boundary), summed directly from the
/// terms that touch `inner`. Throws OverlappingSupports.
double conditional_energy(const LoopConfiguration& inner, const LoopConfiguration& outer, const ClassicalBoundary* boundary,
                          const DistanceOracle& geometry, const InteractionSpec& spec);

/// beta (U-bar + coupling V-bar) count: the bound on any conditional energy of
/// `count` paths, with `coupling` the effective constant from coupling_constant.
double energy_bound(const InteractionSpec& spec, double beta, double coupling, std::size_t count);

}  // namespace lfk
