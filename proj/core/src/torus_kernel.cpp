#include "lorentzfk/torus_kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

constexpr double kPi = std::numbers::pi;

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) fail(ErrorCode::NonpositiveBeta, "beta = " + std::to_string(beta));
}

void check_tol(double tol) {
  if (!(tol > 0.0)) fail(ErrorCode::ConfigInvalid, "tolerance must be positive");
}

double reduce_half(double delta) { return delta - std::round(delta); }

// Lifted Brownian bridge from 0 to `end` over time `t` on `steps` steps.
void lifted_bridge(double end, double t, std::size_t steps, Stream& rng, std::vector<double>& b) {
  b.assign(steps + 1, 0.0);
  b[steps] = end;
  const double dt = t / static_cast<double>(steps);
  struct Span { std::size_t lo, hi; };
  Span stack[128];
  int top = 0;
  stack[top++] = {0, steps};
  while (top > 0) {
    const Span s = stack[--top];
    if (s.hi - s.lo <= 1) continue;
    const std::size_t m = (s.lo + s.hi) / 2;
    const double ta = s.lo * dt, tb = s.hi * dt, tm = m * dt;
    const double mean = b[s.lo] + (b[s.hi] - b[s.lo]) * (tm - ta) / (tb - ta);
    const double var = (tm - ta) * (tb - tm) / (tb - ta);
    b[m] = mean + std::sqrt(var) * rng.normal();
    stack[top++] = {m, s.hi};
    stack[top++] = {s.lo, m};
  }
}

void fill_bridge(const Word* from, const Word* to, double t, std::size_t steps, std::size_t dim, Stream& rng,
                 DiscretizedPath& path, std::size_t start) {
  thread_local std::vector<double> lifted;
  const std::size_t L = path.slices();
  for (std::size_t c = 0; c < dim; ++c) {
    const double delta = signed_delta(to[c], from[c]);
    const auto n = sample_winding(delta, t, rng);
    lifted_bridge(delta + static_cast<double>(n), t, steps, rng, lifted);
    for (std::size_t i = 1; i < steps; ++i) {
      std::size_t s = start + i;
      if (path.is_loop()) s %= L;
      path.slice(s)[c] = from[c] + unit_to_word(lifted[i]);
    }
  }
  if (path.is_loop()) {
    std::copy(path.slice(0), path.slice(0) + dim, path.slice(L));
  }
}

}  // namespace

Word unit_to_word(double x) noexcept {
  double f = x - std::floor(x);
  if (!(f < 1.0) || !(f >= 0.0)) f = 0.0;
  return static_cast<Word>(std::ldexp(f, 64));
}

TorusPoint TorusPoint::from_coords(std::span<const double> coords) {
  TorusPoint p(coords.size());
  for (std::size_t c = 0; c < coords.size(); ++c) p.words_[c] = unit_to_word(coords[c]);
  return p;
}

std::vector<double> TorusPoint::coords() const {
  std::vector<double> out(words_.size());
  for (std::size_t c = 0; c < words_.size(); ++c) out[c] = word_to_unit(words_[c]);
  return out;
}

DiscretizedPath::DiscretizedPath(double beta, std::size_t slices, std::size_t dim, bool is_loop, std::vector<Word> words)
    : beta_(beta), slices_(slices), dim_(dim), is_loop_(is_loop), words_(std::move(words)) {
  check_beta(beta);
  if (slices < 1) fail(ErrorCode::BadSliceCount, "a path needs L >= 1");
  if (words_.size() != (slices + 1) * dim) fail(ErrorCode::MismatchedPaths, "slice storage has the wrong length");
  if (is_loop && !std::equal(slice(0), slice(0) + dim, slice(slices)))
    fail(ErrorCode::MismatchedPaths, "loop does not close");
}

DiscretizedPath DiscretizedPath::constant(const TorusPoint& x, double beta, std::size_t slices, bool is_loop) {
  std::vector<Word> w;
  w.reserve((slices + 1) * x.dim());
  for (std::size_t s = 0; s <= slices; ++s) w.insert(w.end(), x.words().begin(), x.words().end());
  return DiscretizedPath(beta, slices, x.dim(), is_loop, std::move(w));
}

TorusPoint DiscretizedPath::point(std::size_t s) const {
  return TorusPoint::from_words(std::vector<Word>(slice(s), slice(s) + dim_));
}

double theta_images(double delta, double beta, double tol) {
  check_beta(beta);
  check_tol(tol);
  const double d = reduce_half(delta);
  const double norm = 1.0 / std::sqrt(2.0 * kPi * beta);
  auto g = [&](double u) { return norm * std::exp(-u * u / (2.0 * beta)); };
  double sum = g(d);
  for (int m = 1;; ++m) {
    sum += g(d + m) + g(d - m);
    const double a = m + 0.5;
    const double tail = 2.0 * g(a) / (1.0 - std::exp(-a / beta));
    if (tail < tol || m > 100000) break;
  }
  return sum;
}

double theta_fourier(double delta, double beta, double tol) {
  check_beta(beta);
  check_tol(tol);
  const double c = 2.0 * kPi * kPi * beta;
  double sum = 1.0;
  for (int k = 1;; ++k) {
    sum += 2.0 * std::exp(-c * k * k) * std::cos(2.0 * kPi * k * delta);
    const double kk = k + 1.0;
    const double tail = 2.0 * std::exp(-c * kk * kk) / (1.0 - std::exp(-c * (2.0 * kk + 1.0)));
    if (tail < tol || k > 100000) break;
  }
  return sum;
}

double theta_1d(double delta, double beta, double tol) {
  return beta > 1.0 / kPi ? theta_fourier(delta, beta, tol) : theta_images(delta, beta, tol);
}

double transition_density(const TorusPoint& x, const TorusPoint& y, double beta, double tol) {
  check_beta(beta);
  check_tol(tol);
  if (x.dim() != y.dim()) fail(ErrorCode::DimensionMismatch, "points of different dimension");
  const std::size_t d = x.dim();
  if (d == 0) return 1.0;
  const double peak = std::max(1.0, theta_1d(0.0, beta, 1e-3) + 1e-3);
  const double tol_c = tol / (static_cast<double>(d) * std::pow(peak, static_cast<double>(d - 1)));
  double value = 1.0;
  for (std::size_t c = 0; c < d; ++c) value *= theta_1d(signed_delta(x.words()[c], y.words()[c]), beta, tol_c);
  return value;
}

double diagonal_density(double beta, std::size_t dim, double tol) {
  check_beta(beta);
  check_tol(tol);
  if (dim == 0) return 1.0;
  const double peak = std::max(1.0, theta_1d(0.0, beta, 1e-3) + 1e-3);
  const double tol_c = tol / (static_cast<double>(dim) * std::pow(peak, static_cast<double>(dim - 1)));
  return std::pow(theta_1d(0.0, beta, tol_c), static_cast<double>(dim));
}

std::int64_t sample_winding(double delta, double beta, Stream& rng) {
  const double radius = std::sqrt(2.0 * beta * 39.14394658089878) + 1.0;  // ln 1e17
  const auto lo = static_cast<std::int64_t>(std::floor(-delta - radius));
  const auto hi = static_cast<std::int64_t>(std::ceil(-delta + radius));
  if (lo == hi) return lo;
  auto weight = [&](std::int64_t n) {
    const double u = delta + static_cast<double>(n);
    return std::exp(-u * u / (2.0 * beta));
  };
  double total = 0.0;
  for (auto n = lo; n <= hi; ++n) total += weight(n);
  double target = rng.uniform() * total;
  for (auto n = lo; n <= hi; ++n) {
    target -= weight(n);
    if (target < 0.0) return n;
  }
  // Rounding left a sliver of mass: fall back to the nearest winding.
  return static_cast<std::int64_t>(std::llround(-delta));
}

DiscretizedPath sample_bridge(const TorusPoint& x, const TorusPoint& y, double beta, std::size_t slices, Stream& rng) {
  check_beta(beta);
  if (slices < 1) fail(ErrorCode::BadSliceCount, "a path needs L >= 1");
  if (x.dim() != y.dim()) fail(ErrorCode::DimensionMismatch, "bridge endpoints of different dimension");
  const std::size_t d = x.dim();
  std::vector<Word> w((slices + 1) * d);
  std::copy(x.words().begin(), x.words().end(), w.begin());
  std::copy(y.words().begin(), y.words().end(), w.begin() + static_cast<std::ptrdiff_t>(slices * d));
  DiscretizedPath path(beta, slices, d, false, std::move(w));
  fill_bridge(path.slice(0), path.slice(slices), beta, slices, d, rng, path, 0);
  return path;
}

DiscretizedPath sample_loop(const TorusPoint& x, double beta, std::size_t slices, Stream& rng) {
  check_beta(beta);
  if (slices < 1) fail(ErrorCode::BadSliceCount, "a path needs L >= 1");
  DiscretizedPath path = DiscretizedPath::constant(x, beta, slices, true);
  std::vector<Word> anchor(x.words().begin(), x.words().end());
  fill_bridge(anchor.data(), anchor.data(), beta, slices, x.dim(), rng, path, 0);
  return path;
}

void resample_segment(DiscretizedPath& path, std::size_t start, std::size_t steps, Stream& rng) {
  const std::size_t L = path.slices();
  if (steps < 2) return;
  if (path.is_loop()) {
    if (steps > L) fail(ErrorCode::BadSliceCount, "segment longer than the loop");
    start %= L;
  } else if (start + steps > L) {
    fail(ErrorCode::BadSliceCount, "segment runs past the path end");
  }
  const std::size_t d = path.dim();
  const std::size_t end = path.is_loop() ? (start + steps) % L : start + steps;
  thread_local std::vector<Word> ends;
  ends.assign(2 * d, 0);
  std::copy(path.slice(start), path.slice(start) + d, ends.begin());
  std::copy(path.slice(end), path.slice(end) + d, ends.begin() + static_cast<std::ptrdiff_t>(d));
  fill_bridge(ends.data(), ends.data() + d, path.step() * static_cast<double>(steps), steps, d, rng, path, start);
}

GroupElement::GroupElement(std::vector<double> theta, std::vector<double> matrix, std::size_t dim)
    : theta_(std::move(theta)), matrix_(std::move(matrix)), dim_(dim) {
  const std::size_t dp = theta_.size();
  if (dp == 0 || dp > dim_) fail(ErrorCode::DimensionMismatch, "need 1 <= d' <= d");
  if (matrix_.size() != dp * dim_) fail(ErrorCode::DimensionMismatch, "matrix A must be d' x d");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(dp), static_cast<Eigen::Index>(dim_));
  for (std::size_t r = 0; r < dp; ++r)
    for (std::size_t c = 0; c < dim_; ++c) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = matrix_[r * dim_ + c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  if (!(svd.singularValues().minCoeff() > 1e-10)) fail(ErrorCode::RankDeficient, "matrix A does not have row rank d'");
  for (double s : shift()) shift_words_.push_back(unit_to_word(s));
}

GroupElement GroupElement::translation(std::vector<double> theta) {
  const std::size_t d = theta.size();
  std::vector<double> eye(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) eye[i * d + i] = 1.0;
  return GroupElement(std::move(theta), std::move(eye), d);
}

double GroupElement::theta_norm() const noexcept {
  double s = 0.0;
  for (double t : theta_) s += t * t;
  return std::sqrt(s);
}

std::vector<double> GroupElement::shift() const {
  std::vector<double> s(dim_, 0.0);
  for (std::size_t r = 0; r < theta_.size(); ++r)
    for (std::size_t c = 0; c < dim_; ++c) s[c] += theta_[r] * matrix_[r * dim_ + c];
  return s;
}

GroupElement GroupElement::inverse() const {
  GroupElement g = *this;
  for (double& t : g.theta_) t = -t;
  for (Word& w : g.shift_words_) w = Word{0} - w;
  return g;
}

GroupElement GroupElement::scaled(double factor) const {
  std::vector<double> t = theta_;
  for (double& v : t) v *= factor;
  return GroupElement(std::move(t), matrix_, dim_);
}

bool GroupElement::is_identity() const noexcept {
  return std::all_of(shift_words_.begin(), shift_words_.end(), [](Word w) { return w == 0; });
}

TorusPoint apply_group_point(const GroupElement& g, const TorusPoint& x) {
  if (g.dim() != x.dim()) fail(ErrorCode::DimensionMismatch, "group element and point dimensions differ");
  TorusPoint y = x;
  for (std::size_t c = 0; c < x.dim(); ++c) y.words()[c] += g.shift_words()[c];
  return y;
}

DiscretizedPath apply_group_path(const GroupElement& g, const DiscretizedPath& p) {
  if (g.dim() != p.dim()) fail(ErrorCode::DimensionMismatch, "group element and path dimensions differ");
  DiscretizedPath q = p;
  const auto sw = g.shift_words();
  for (std::size_t s = 0; s <= p.slices(); ++s)
    for (std::size_t c = 0; c < p.dim(); ++c) q.slice(s)[c] += sw[c];
  return q;
}

}  // namespace lfk
