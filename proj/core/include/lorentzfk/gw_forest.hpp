#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lorentzfk/rng.hpp"

namespace lfk {

/// Critical offspring law {p_k}. Finite-support laws come from
/// `validate_critical`; the built-in closed forms cover the geometric law
/// p_k = 2^-(k+1) and laws with infinite support whose first two moments are
/// supplied analytically.
class OffspringDistribution {
 public:
  enum class Kind { Finite, Geometric, ClosedForm };

  /// Validates a finite-support map k -> p_k. Throws NotAProbability,
  /// NotCritical.
  static OffspringDistribution validate_critical(const std::map<int, double>& probs);

  /// p_k = 2^-(k+1), k >= 0: mean 1, variance 2.
  static OffspringDistribution geometric();

  /// p_0 = p_2 = 1/2: mean 1, variance 1.
  static OffspringDistribution binary();

  /// Infinite-support law with analytically supplied moments. Throws
  /// InfiniteVariance when `second_moment` is not finite, NotCritical when the
  /// stated mean is not 1, and NotAProbability when the pmf does not sum to 1.
  static OffspringDistribution closed_form(std::string name, std::function<double(int)> pmf, double mean,
                                           double second_moment);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  double prob(int k) const;
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  /// Largest k with p_k > 0, or -1 for infinite support.
  int max_support() const noexcept { return max_support_; }

  std::uint32_t sample(Stream& rng) const;

  /// Sum of `count` independent draws.
  std::uint64_t sample_sum(std::uint64_t count, Stream& rng) const;

 private:
  OffspringDistribution() = default;
  void build_table();

  Kind kind_ = Kind::Finite;
  std::string name_;
  std::vector<double> finite_;  // p_0..p_K for Kind::Finite
  std::function<double(int)> pmf_;
  double mean_ = 1.0;
  double variance_ = 0.0;
  int max_support_ = -1;
  std::vector<double> cdf_;  // truncated cumulative table used for sampling
};

/// Size-biased companion p~_k = k p_k of a critical law.
class SizeBiasedDistribution {
 public:
  explicit SizeBiasedDistribution(const OffspringDistribution& base);

  double prob(int k) const { return static_cast<double>(k) * base_.prob(k); }
  /// Sigma^2 + 1.
  double mean() const noexcept { return base_.variance() + 1.0; }
  const OffspringDistribution& base() const noexcept { return base_; }

  std::uint32_t sample(Stream& rng) const;

 private:
  OffspringDistribution base_;
  std::vector<double> cdf_;
};

SizeBiasedDistribution size_bias(const OffspringDistribution& dist);

/// A rooted planar tree stored in level order: the vertices of level n occupy
/// the index range [level_begin(n), level_begin(n + 1)), ordered left to
/// right, and the children of any vertex form a contiguous run of the next
/// level. The whole tree is determined by its child counts in this order.
class RootedPlanarTree {
 public:
  RootedPlanarTree() : RootedPlanarTree(std::vector<std::uint32_t>{0}) {}

  /// Builds from child counts listed in level order. Throws MalformedTree when
  /// the counts do not describe a finite tree.
  explicit RootedPlanarTree(std::vector<std::uint32_t> child_counts,
                            std::optional<std::vector<std::uint32_t>> spine = std::nullopt);

  /// Builds from a parent array in which siblings appear in planar order.
  /// Vertex 0 must be the only root. Throws MalformedTree.
  static RootedPlanarTree from_parents(std::span<const std::int64_t> parents, std::span<const std::int64_t> heights);

  std::size_t vertex_count() const noexcept { return child_counts_.size(); }
  /// Index of the highest non-empty level.
  std::uint32_t height() const noexcept { return static_cast<std::uint32_t>(level_offset_.size() - 2); }
  std::uint32_t level_of(std::uint32_t v) const { return level_[v]; }
  std::int64_t parent(std::uint32_t v) const { return parent_[v]; }
  std::uint32_t child_count(std::uint32_t v) const { return child_counts_[v]; }
  std::uint32_t first_child(std::uint32_t v) const { return first_child_[v]; }
  std::uint32_t level_begin(std::uint32_t n) const { return level_offset_[n]; }
  std::uint32_t level_size(std::uint32_t n) const { return level_offset_[n + 1] - level_offset_[n]; }
  const std::vector<std::uint32_t>& child_counts() const noexcept { return child_counts_; }
  const std::optional<std::vector<std::uint32_t>>& spine() const noexcept { return spine_; }

  /// Vertex ids in depth-first preorder, children visited in planar order.
  std::vector<std::uint32_t> dfs_order() const;

  bool operator==(const RootedPlanarTree& other) const noexcept { return child_counts_ == other.child_counts_; }

 private:
  std::vector<std::uint32_t> child_counts_;
  std::vector<std::uint32_t> first_child_;
  std::vector<std::int64_t> parent_;
  std::vector<std::uint32_t> level_;
  std::vector<std::uint32_t> level_offset_;
  std::optional<std::vector<std::uint32_t>> spine_;
};

/// Critical GW tree truncated at `max_height`; may die out earlier.
RootedPlanarTree sample_gw_tree(const OffspringDistribution& dist, std::uint32_t max_height, Stream& rng);

/// Single-spine size-biased tree of height exactly `height` (>= 1).
RootedPlanarTree sample_sb_tree(const OffspringDistribution& dist, std::uint32_t height, Stream& rng);

/// Layer counts k_0..k_height of the size-biased process without building the
/// tree: one uniformly chosen particle reproduces by the size-biased law, the
/// others by the original law. Same law as `layer_sizes(sample_sb_tree(...))`;
/// the prefix k_0..k_m does not depend on `height`.
std::vector<std::uint64_t> sample_sb_layers(const OffspringDistribution& dist, std::uint32_t height, Stream& rng);

std::vector<std::uint64_t> layer_sizes(const RootedPlanarTree& tree);

}  // namespace lfk
