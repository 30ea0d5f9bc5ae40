#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lorentzfk/torus_kernel.hpp"

namespace lfk {

/// One path per vertex of a finite vertex set, all sharing beta, L and d.
/// Sampler states hold closed loops; window configurations may hold bridges.
class LoopConfiguration {
 public:
  LoopConfiguration() = default;
  LoopConfiguration(double beta, std::size_t slices, std::size_t dim);

  /// Inserts or replaces the path at `vertex`. Throws MismatchedPaths.
  void set(std::uint32_t vertex, DiscretizedPath path);
  bool contains(std::uint32_t vertex) const noexcept;
  /// Throws UnknownVertex.
  const DiscretizedPath& at(std::uint32_t vertex) const;
  DiscretizedPath& at(std::uint32_t vertex);

  const std::vector<std::uint32_t>& vertices() const noexcept { return vertices_; }
  const std::vector<DiscretizedPath>& paths() const noexcept { return paths_; }
  std::vector<DiscretizedPath>& paths() noexcept { return paths_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  bool empty() const noexcept { return vertices_.empty(); }
  double beta() const noexcept { return beta_; }
  std::size_t slices() const noexcept { return slices_; }
  std::size_t dim() const noexcept { return dim_; }
  bool all_loops() const noexcept;

  /// Union of two configurations with disjoint supports. Throws
  /// OverlappingSupports, MismatchedPaths.
  LoopConfiguration merged(const LoopConfiguration& other) const;
  /// The restriction to `keep` (vertices not present are ignored).
  LoopConfiguration restricted(const std::vector<std::uint32_t>& keep) const;
  LoopConfiguration without(const std::vector<std::uint32_t>& drop) const;

  /// Independent free loops with uniform marked points.
  static LoopConfiguration sample_free(const std::vector<std::uint32_t>& vertices, double beta, std::size_t slices,
                                       std::size_t dim, Stream& rng);

  bool operator==(const LoopConfiguration&) const = default;

 private:
  std::size_t index_of(std::uint32_t vertex) const noexcept;

  double beta_ = 1.0;
  std::size_t slices_ = 1;
  std::size_t dim_ = 1;
  std::vector<std::uint32_t> vertices_;
  std::vector<DiscretizedPath> paths_;
};

/// Fixed classical spins on exterior vertices.
class ClassicalBoundary {
 public:
  void set(std::uint32_t vertex, TorusPoint point);
  bool contains(std::uint32_t vertex) const noexcept;
  const std::vector<std::pair<std::uint32_t, TorusPoint>>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  bool operator==(const ClassicalBoundary&) const = default;

 private:
  std::vector<std::pair<std::uint32_t, TorusPoint>> points_;
};

}  // namespace lfk
