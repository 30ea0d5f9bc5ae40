#pragma once

#include <functional>
#include <string>

namespace lfk {

/// min(1, (r ln r)^-3) for r > 1 and 1 otherwise: the envelope every admissible
/// coupling must stay under for r >= 2.
double decay_majorant(double r) noexcept;

/// Distance coupling J: (0, inf) -> R. Built-ins are admissible by
/// construction; custom functions are checked on a validation grid.
class Decay {
 public:
  enum class Kind { Zero, NearestNeighbour, LogCubed, Custom };

  static Decay zero();
  /// J(r) = strength for r <= 1 and 0 beyond.
  static Decay nearest_neighbour(double strength);
  /// J(r) = scale * decay_majorant(r); admissible for 0 <= scale <= 1.
  static Decay log_cubed(double scale = 1.0);
  static Decay custom(std::string name, std::function<double(double)> fn);

  double operator()(double r) const;

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double parameter() const noexcept { return param_; }
  bool is_zero() const noexcept { return kind_ == Kind::Zero || ((kind_ != Kind::Custom) && param_ == 0.0); }

  /// Largest r at which J can be nonzero (infinity when unbounded support).
  double support_radius() const noexcept;

  /// sup over r > radius of J(r) r^2; closed form for built-ins, a log-spaced
  /// grid for custom couplings.
  double sup_weighted_square(double radius) const;

  /// Throws InadmissibleJ unless J is bounded, nonincreasing and below the
  /// majorant for r >= 2 on the validation grid.
  void check_admissible() const;

 private:
  Kind kind_ = Kind::Zero;
  std::string name_ = "zero";
  double param_ = 0.0;
  std::function<double(double)> fn_;
};

}  // namespace lfk
