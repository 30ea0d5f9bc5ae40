#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lorentzfk/rng.hpp"

namespace lfk {

/// Torus coordinates are stored as 64-bit fixed-point fractions of a turn:
/// the word w stands for w / 2^64 in [0, 1). Addition wraps modulo 1 exactly,
/// so translations and their inverses compose without rounding.
using Word = std::uint64_t;

inline double word_to_unit(Word w) noexcept { return static_cast<double>(w >> 11) * 0x1.0p-53; }

/// Reduces x modulo 1 onto the word grid (half-open [0, 1)).
Word unit_to_word(double x) noexcept;

/// Minimal-image difference a - b as a real in [-1/2, 1/2).
inline double signed_delta(Word a, Word b) noexcept {
  return static_cast<double>(static_cast<std::int64_t>(a - b)) * 0x1.0p-64;
}

class TorusPoint {
 public:
  TorusPoint() = default;
  explicit TorusPoint(std::size_t dim) : words_(dim, 0) {}
  static TorusPoint from_coords(std::span<const double> coords);
  static TorusPoint from_words(std::vector<Word> words) { TorusPoint p; p.words_ = std::move(words); return p; }

  std::size_t dim() const noexcept { return words_.size(); }
  double coord(std::size_t c) const { return word_to_unit(words_.at(c)); }
  std::vector<double> coords() const;
  std::span<const Word> words() const noexcept { return words_; }
  std::span<Word> words() noexcept { return words_; }

  bool operator==(const TorusPoint&) const = default;

 private:
  std::vector<Word> words_;
};

/// L + 1 time slices at tau_s = s beta / L; for loops the first and last slice
/// coincide.
class DiscretizedPath {
 public:
  DiscretizedPath() = default;
  /// Throws NonpositiveBeta, BadSliceCount, and MismatchedPaths when a loop's
  /// end slices differ or the slice storage has the wrong length.
  DiscretizedPath(double beta, std::size_t slices, std::size_t dim, bool is_loop, std::vector<Word> words);
  /// Constant path (all slices at `x`).
  static DiscretizedPath constant(const TorusPoint& x, double beta, std::size_t slices, bool is_loop);

  double beta() const noexcept { return beta_; }
  /// L, the number of time steps.
  std::size_t slices() const noexcept { return slices_; }
  std::size_t dim() const noexcept { return dim_; }
  bool is_loop() const noexcept { return is_loop_; }
  double step() const noexcept { return beta_ / static_cast<double>(slices_); }

  const Word* slice(std::size_t s) const noexcept { return words_.data() + s * dim_; }
  Word* slice(std::size_t s) noexcept { return words_.data() + s * dim_; }
  TorusPoint point(std::size_t s) const;
  const std::vector<Word>& words() const noexcept { return words_; }

  bool operator==(const DiscretizedPath&) const = default;

 private:
  double beta_ = 1.0;
  std::size_t slices_ = 1;
  std::size_t dim_ = 0;
  bool is_loop_ = false;
  std::vector<Word> words_;
};

/// One-dimensional periodic heat kernel sum_n (2 pi beta)^-1/2 exp(-(delta+n)^2 / 2 beta)
/// by images; the truncation keeps the discarded tail below `tol`.
double theta_images(double delta, double beta, double tol);
/// Same kernel from its Fourier series 1 + 2 sum_k exp(-2 pi^2 k^2 beta) cos(2 pi k delta).
double theta_fourier(double delta, double beta, double tol);
/// Dispatches to the faster representation (Fourier for beta > 1/pi).
double theta_1d(double delta, double beta, double tol);

/// Torus transition density p^beta(x, y). Throws NonpositiveBeta.
double transition_density(const TorusPoint& x, const TorusPoint& y, double beta, double tol);
/// p^beta(x, x) for any x. Throws NonpositiveBeta.
double diagonal_density(double beta, std::size_t dim, double tol);

/// Winding n drawn with weight exp(-(delta + n)^2 / 2 beta); the candidate
/// window keeps every n whose weight exceeds 1e-17 of the largest.
std::int64_t sample_winding(double delta, double beta, Stream& rng);

/// Brownian bridge from x to y over time beta on L steps: winding first, then
/// Levy midpoint refinement of the lifted bridge, reduced modulo 1; the last
/// slice is exactly y. Throws NonpositiveBeta, BadSliceCount, DimensionMismatch.
DiscretizedPath sample_bridge(const TorusPoint& x, const TorusPoint& y, double beta, std::size_t slices, Stream& rng);
DiscretizedPath sample_loop(const TorusPoint& x, double beta, std::size_t slices, Stream& rng);

/// Redraws slices start+1 .. start+steps-1 (cyclically for loops) as a bridge
/// between the slices at `start` and `start + steps`, which stay fixed.
void resample_segment(DiscretizedPath& path, std::size_t start, std::size_t steps, Stream& rng);

/// x -> x + theta A mod 1 with theta in R^d' and A a d' x d matrix of full row
/// rank.
class GroupElement {
 public:
  GroupElement() = default;
  /// `matrix` is row-major d' x d. Throws DimensionMismatch, RankDeficient.
  GroupElement(std::vector<double> theta, std::vector<double> matrix, std::size_t dim);
  /// d' = d, A = identity.
  static GroupElement translation(std::vector<double> theta);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t group_dim() const noexcept { return theta_.size(); }
  const std::vector<double>& theta() const noexcept { return theta_; }
  const std::vector<double>& matrix() const noexcept { return matrix_; }
  double theta_norm() const noexcept;
  /// theta A, unreduced.
  std::vector<double> shift() const;
  std::span<const Word> shift_words() const noexcept { return shift_words_; }

  /// Exact inverse: the shift words are negated rather than recomputed.
  GroupElement inverse() const;
  /// Parameter theta -> factor * theta.
  GroupElement scaled(double factor) const;
  bool is_identity() const noexcept;

 private:
  std::vector<double> theta_;
  std::vector<double> matrix_;
  std::size_t dim_ = 0;
  std::vector<Word> shift_words_;
};

TorusPoint apply_group_point(const GroupElement& g, const TorusPoint& x);
DiscretizedPath apply_group_path(const GroupElement& g, const DiscretizedPath& p);

}  // namespace lfk
