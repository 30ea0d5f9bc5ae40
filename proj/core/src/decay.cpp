#include "lorentzfk/decay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

// Root of r ln r = 1, where the majorant leaves its cap.
constexpr double kCapEnd = 1.7632228343518968;

std::vector<double> validation_grid() {
  std::vector<double> r;
  for (int i = 0; i < 4096; ++i) r.push_back(1e-3 * std::pow(1e9, i / 4095.0));
  for (int i = 1; i <= 2048; ++i) r.push_back(i);
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace

double decay_majorant(double r) noexcept {
  if (r <= kCapEnd) return 1.0;
  const double x = r * std::log(r);
  return 1.0 / (x * x * x);
}

Decay Decay::zero() { return Decay(); }

Decay Decay::nearest_neighbour(double strength) {
  Decay d;
  d.kind_ = Kind::NearestNeighbour;
  d.name_ = "nearest_neighbour";
  d.param_ = strength;
  return d;
}

Decay Decay::log_cubed(double scale) {
  Decay d;
  d.kind_ = Kind::LogCubed;
  d.name_ = "log_cubed";
  d.param_ = scale;
  return d;
}

Decay Decay::custom(std::string name, std::function<double(double)> fn) {
  if (!fn) fail(ErrorCode::InadmissibleJ, "custom coupling without a function");
  Decay d;
  d.kind_ = Kind::Custom;
  d.name_ = std::move(name);
  d.fn_ = std::move(fn);
  return d;
}

double Decay::operator()(double r) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::NearestNeighbour: return r <= 1.0 ? param_ : 0.0;
    case Kind::LogCubed: return param_ * decay_majorant(r);
    case Kind::Custom: return fn_(r);
  }
  return 0.0;
}

double Decay::support_radius() const noexcept {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::NearestNeighbour: return 1.0;
    default: return std::numeric_limits<double>::infinity();
  }
}

double Decay::sup_weighted_square(double radius) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::NearestNeighbour: return radius < 1.0 ? std::abs(param_) : 0.0;
    case Kind::LogCubed: {
      if (radius < kCapEnd) return std::abs(param_) * kCapEnd * kCapEnd;
      return std::abs(param_) * decay_majorant(radius) * radius * radius;
    }
    case Kind::Custom: break;
  }
  double best = 0.0;
  const double lo = std::max(radius, 1e-3);
  for (int i = 0; i <= 4096; ++i) {
    const double r = lo * std::pow(1e6, i / 4096.0) * (1.0 + 1e-12);
    best = std::max(best, std::abs(fn_(r)) * r * r);
  }
  return best;
}

void Decay::check_admissible() const {
  if (kind_ == Kind::LogCubed && (param_ < 0.0 || param_ > 1.0))
    fail(ErrorCode::InadmissibleJ, "log_cubed scale must lie in [0, 1]");
  const auto grid = validation_grid();
  double prev = std::numeric_limits<double>::infinity();
  for (double r : grid) {
    const double v = (*this)(r);
    if (!std::isfinite(v)) fail(ErrorCode::InadmissibleJ, name_ + " is unbounded near r = " + std::to_string(r));
    if (v > prev + 1e-15 * std::max(1.0, std::abs(prev)))
      fail(ErrorCode::InadmissibleJ, name_ + " increases at r = " + std::to_string(r));
    if (r >= 2.0 && v > decay_majorant(r) * (1.0 + 1e-12))
      fail(ErrorCode::InadmissibleJ, name_ + " exceeds (r ln r)^-3 at r = " + std::to_string(r));
    prev = v;
  }
}

}  // namespace lfk
