#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "lorentzfk/decay.hpp"
#include "lorentzfk/gw_forest.hpp"

namespace lfk {

enum class EdgeTag : std::uint8_t { Circle, Tree, Fan };

struct Edge {
  std::uint32_t a;
  std::uint32_t b;
  EdgeTag tag;
  bool operator==(const Edge&) const = default;
};

/// A finite rooted causal triangulation of the cylinder, levels 0..H. Edges
/// form a multiset: a level with one vertex carries a circle self-loop, a
/// level with two vertices carries two parallel circle edges, and thin strips
/// give repeated inter-level edges. Each vertex above level 0 remembers the
/// arc of the level below it is joined to (start position and length counted
/// with multiplicity), which fixes the faces.
class Triangulation {
 public:
  /// Builds the triangulation parametrized by `tree`; vertex ids coincide with
  /// the tree's level-order ids and level orders are anchored at the root.
  static Triangulation from_tree(const RootedPlanarTree& tree);

  /// Builds from explicit level lists (cyclic orders) and an edge multiset,
  /// recovering the face structure from the edges. Throws NotATriangulation.
  static Triangulation from_parts(std::vector<std::vector<std::uint32_t>> layers, std::vector<Edge> edges);

  std::size_t vertex_count() const noexcept { return level_of_.size(); }
  std::uint32_t height() const noexcept { return static_cast<std::uint32_t>(layers_.size() - 1); }
  const std::vector<std::vector<std::uint32_t>>& layers() const noexcept { return layers_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  std::uint32_t level_of(std::uint32_t v) const { return level_of_.at(v); }
  std::uint32_t root_vertex() const noexcept { return layers_[0][0]; }
  /// The level-0 circle edge (a self-loop at the root).
  Edge root_edge() const noexcept { return {root_vertex(), root_vertex(), EdgeTag::Circle}; }
  std::vector<std::uint64_t> layer_sizes() const;

  /// Faces of strip `level` (between `level` and `level + 1`) as vertex
  /// triples; the first three-vertex entry of an up-triangle lies on the lower
  /// circle twice.
  std::vector<std::array<std::uint32_t, 3>> strip_triangles(std::uint32_t level) const;

 private:
  Triangulation() = default;
  void index_levels();

  std::vector<std::vector<std::uint32_t>> layers_;
  std::vector<Edge> edges_;
  std::vector<std::uint32_t> level_of_;
  std::vector<std::uint32_t> pos_of_;
  // Ordered levels used for faces, and per-vertex arcs into them.
  std::vector<std::vector<std::uint32_t>> ordered_;
  std::vector<std::uint32_t> arc_start_;
  std::vector<std::uint32_t> arc_len_;

  friend RootedPlanarTree triangulation_to_tree(const Triangulation& tri);
};

Triangulation tree_to_triangulation(const RootedPlanarTree& tree);

/// Recovers the spanning tree of leftmost downward edges from the level lists
/// and edge multiset alone. Throws NotATriangulation.
RootedPlanarTree triangulation_to_tree(const Triangulation& tri);

/// Shortest-path lengths over all edges (self-loops ignored). Per-source BFS
/// results are kept in an LRU cache guarded by a mutex, so one oracle can be
/// shared between threads.
class DistanceOracle {
 public:
  explicit DistanceOracle(const Triangulation& tri, std::size_t cache_capacity = 4096);

  std::size_t vertex_count() const noexcept { return offsets_.size() - 1; }
  std::uint32_t distance(std::uint32_t i, std::uint32_t j) const;
  std::shared_ptr<const std::vector<std::uint32_t>> distances_from(std::uint32_t source) const;
  /// Uncached BFS, for sweeps over many sources.
  std::vector<std::uint32_t> bfs_distances(std::uint32_t source) const;
  std::span<const std::uint32_t> neighbours(std::uint32_t v) const;
  std::uint32_t root() const noexcept { return root_; }
  const std::vector<std::uint64_t>& layer_sizes() const noexcept { return layers_; }
  std::uint32_t level_of(std::uint32_t v) const { return level_of_.at(v); }

  static constexpr std::uint32_t kUnreachable = 0xffffffffu;

 private:
  std::vector<std::uint32_t> bfs(std::uint32_t source) const;

  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> adjacency_;
  std::vector<std::uint32_t> level_of_;
  std::vector<std::uint64_t> layers_;
  std::uint32_t root_ = 0;
  std::size_t capacity_;

  mutable std::mutex mutex_;
  mutable std::list<std::uint32_t> lru_;
  mutable std::unordered_map<std::uint32_t,
                             std::pair<std::shared_ptr<const std::vector<std::uint32_t>>, std::list<std::uint32_t>::iterator>>
      cache_;
};

std::uint32_t graph_distance(const DistanceOracle& oracle, std::uint32_t i, std::uint32_t j);

/// max over i >= 2 of k_i / (i (ln i)^(1/2 + eps)); zero when there is no
/// level i >= 2. Throws EmptyInput.
double growth_constant(std::span<const std::uint64_t> layers, double eps);

struct SeriesBound {
  double value = 0.0;
  double tail_bound = 0.0;
  std::uint32_t argmax = 0;
};

/// Upper bound on the layer counts beyond the recorded levels.
using LayerBound = std::function<double(double)>;

/// c i (ln i)^(1/2 + eps) with c = growth_constant(layers, eps).
LayerBound growth_layer_bound(std::span<const std::uint64_t> layers, double eps = 0.25);

/// sum_{i >= 1} k_i J(i) over the recorded levels with a bound on the
/// remainder from `bound` (default: the growth bound with eps = 0.25).
/// Throws InadmissibleJ.
SeriesBound j_layer_sum(std::span<const std::uint64_t> layers, const Decay& j,
                        std::optional<LayerBound> bound = std::nullopt);

/// Bound on sum_{i > from} bound(i) J(i) with J replaced by its majorant.
double majorant_tail(double from, const Decay& j, const LayerBound& bound);

/// Bound on sum over vertices above level `top` of J(distance) for a source
/// at `level`, with layer counts from `bound` and J by its majorant.
double beyond_levels_tail(double level, double top, const Decay& j, const LayerBound& bound);

/// max over vertices j of sum_{j'} J(d) d^2 over d <= radius; the tail counts
/// the remaining vertices times sup_{r > radius} J(r) r^2.
SeriesBound interaction_moment(const DistanceOracle& oracle, const Decay& j, std::uint32_t radius);

/// Effective constant in the per-vertex energy bound: twice the largest
/// coupling sum sup_i sum_{j != i} J(d(i, j)) over `sources` (all vertices
/// when empty), with the beyond-geometry remainder as tail.
SeriesBound coupling_constant(const DistanceOracle& oracle, const Decay& j, std::span<const std::uint32_t> sources = {});

}  // namespace lfk
