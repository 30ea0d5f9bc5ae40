#include "lorentzfk/cdlt_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

struct Parsed {
  std::vector<std::vector<std::uint32_t>> ordered;
  std::vector<std::uint32_t> arc_start;
  std::vector<std::uint32_t> arc_len;
};

[[noreturn]] void not_a_triangulation(const std::string& what) { fail(ErrorCode::NotATriangulation, what); }

bool arc_matches(const std::vector<std::uint32_t>& down_sorted, std::uint32_t start, std::uint32_t k,
                 std::vector<std::uint32_t>& scratch) {
  scratch.clear();
  for (std::uint32_t t = 0; t < down_sorted.size(); ++t) scratch.push_back((start + t) % k);
  std::sort(scratch.begin(), scratch.end());
  return scratch == down_sorted;
}

// Recovers cyclic anchoring and down-arcs from level lists and the edge
// multiset alone.
Parsed parse(const std::vector<std::vector<std::uint32_t>>& layers, const std::vector<Edge>& edges) {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.size();
  if (layers.empty() || layers[0].size() != 1) not_a_triangulation("level 0 must hold exactly the root");
  std::vector<std::uint32_t> level(n, std::numeric_limits<std::uint32_t>::max());
  for (std::uint32_t l = 0; l < layers.size(); ++l) {
    if (layers[l].empty()) not_a_triangulation("empty level " + std::to_string(l));
    for (auto v : layers[l]) {
      if (v >= n || level[v] != std::numeric_limits<std::uint32_t>::max())
        not_a_triangulation("vertex ids must be 0..V-1, each on one level");
      level[v] = l;
    }
  }

  using Pair = std::pair<std::uint32_t, std::uint32_t>;
  std::vector<std::vector<Pair>> horizontal(layers.size());
  std::vector<std::vector<std::uint32_t>> down(n);
  for (const auto& e : edges) {
    if (e.a >= n || e.b >= n) not_a_triangulation("edge endpoint out of range");
    const auto la = level[e.a], lb = level[e.b];
    if (la == lb) {
      horizontal[la].emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
    } else if (la + 1 == lb) {
      down[e.b].push_back(e.a);
    } else if (lb + 1 == la) {
      down[e.a].push_back(e.b);
    } else {
      not_a_triangulation("edge spans more than one strip");
    }
  }
  for (std::uint32_t l = 0; l < layers.size(); ++l) {
    const auto& lv = layers[l];
    std::vector<Pair> expect;
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const auto a = lv[i], b = lv[(i + 1) % lv.size()];
      expect.emplace_back(std::min(a, b), std::max(a, b));
    }
    std::sort(expect.begin(), expect.end());
    std::sort(horizontal[l].begin(), horizontal[l].end());
    if (expect != horizontal[l]) not_a_triangulation("circle edges of level " + std::to_string(l) + " do not follow its cyclic order");
  }

  Parsed out;
  out.ordered.push_back(layers[0]);
  out.arc_start.assign(n, 0);
  out.arc_len.assign(n, 0);
  std::vector<std::uint32_t> pos(n, 0), scratch;
  std::vector<std::vector<std::uint32_t>> down_pos;
  for (std::uint32_t l = 0; l + 1 < layers.size(); ++l) {
    const auto& below = out.ordered[l];
    const auto k = static_cast<std::uint32_t>(below.size());
    for (std::uint32_t i = 0; i < k; ++i) pos[below[i]] = i;
    const auto& up = layers[l + 1];
    const std::size_t m = up.size();
    down_pos.assign(m, {});
    std::uint64_t excess = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto u = up[i];
      if (down[u].empty()) not_a_triangulation("vertex " + std::to_string(u) + " has no downward edge");
      for (auto w : down[u]) down_pos[i].push_back(pos[w]);
      std::sort(down_pos[i].begin(), down_pos[i].end());
      excess += down_pos[i].size() - 1;
    }
    if (excess != k) not_a_triangulation("down-arcs of level " + std::to_string(l + 1) + " do not tile the level below");

    auto len = [&](std::size_t i) { return static_cast<std::uint32_t>(down_pos[i].size()); };
    std::vector<std::uint32_t> valid;
    std::vector<std::uint32_t> starts(m);
    std::uint32_t last_candidate = std::numeric_limits<std::uint32_t>::max();
    for (auto c : down_pos[0]) {
      if (c == last_candidate) continue;
      last_candidate = c;
      std::uint32_t s = c;
      bool ok = true;
      for (std::size_t i = 0; i < m && ok; ++i) {
        ok = arc_matches(down_pos[i], s, k, scratch);
        s = (s + len(i) - 1) % k;
      }
      if (ok) valid.push_back(c);
    }
    if (valid.empty()) not_a_triangulation("down-neighbours at level " + std::to_string(l + 1) + " are not contiguous arcs");

    auto fill = [&](std::uint32_t s0) {
      std::uint32_t s = s0;
      for (std::size_t i = 0; i < m; ++i) {
        starts[i] = s;
        s = (s + len(i) - 1) % k;
      }
    };
    auto anchored = [&]() {
      for (std::size_t i = 0; i + 1 < m; ++i)
        if (starts[i + 1] < starts[i]) return false;
      return starts[m - 1] + len(m - 1) - 1 >= k;
    };
    std::size_t rotation = 0;
    bool found = false;
    for (auto s0 : valid) {
      fill(s0);
      if (anchored()) {
        found = true;
        break;
      }
    }
    if (!found) {
      fill(valid.front());
      for (std::size_t i = 0; i < m; ++i)
        if (starts[i] + len(i) - 1 >= k) rotation = (i + 1) % m;
    }
    std::vector<std::uint32_t> ord(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t src = (i + rotation) % m;
      ord[i] = up[src];
      out.arc_start[up[src]] = starts[src];
      out.arc_len[up[src]] = len(src);
    }
    out.ordered.push_back(std::move(ord));
  }
  return out;
}

double decreasing_tail(const std::function<double(double)>& f, double from) {
  // f(from) + int_from^inf f, substituting x = from e^t.
  constexpr int kIntervals = 4000;
  constexpr double kSpan = 60.0;
  const double h = kSpan / kIntervals;
  double acc = 0.0;
  for (int i = 0; i <= kIntervals; ++i) {
    const double t = i * h;
    const double x = from * std::exp(t);
    const double w = (i == 0 || i == kIntervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * f(x) * x;
  }
  return f(from) + acc * h / 3.0;
}

double decay_scale(const Decay& j) {
  return j.kind() == Decay::Kind::LogCubed ? std::abs(j.parameter()) : 1.0;
}

}  // namespace

Triangulation Triangulation::from_tree(const RootedPlanarTree& tree) {
  Triangulation t;
  const std::uint32_t levels = tree.height() + 1;
  t.layers_.resize(levels);
  for (std::uint32_t l = 0; l < levels; ++l)
    for (std::uint32_t i = 0; i < tree.level_size(l); ++i) t.layers_[l].push_back(tree.level_begin(l) + i);
  const std::size_t n = tree.vertex_count();
  t.arc_start_.assign(n, 0);
  t.arc_len_.assign(n, 0);
  for (std::uint32_t l = 0; l < levels; ++l) {
    const auto& lv = t.layers_[l];
    for (std::size_t i = 0; i < lv.size(); ++i) t.edges_.push_back({lv[i], lv[(i + 1) % lv.size()], EdgeTag::Circle});
  }
  for (std::uint32_t v = 1; v < n; ++v) t.edges_.push_back({v, static_cast<std::uint32_t>(tree.parent(v)), EdgeTag::Tree});
  for (std::uint32_t l = 0; l + 1 < levels; ++l) {
    const std::uint32_t base = tree.level_begin(l);
    const std::uint32_t k = tree.level_size(l);
    const auto& up = t.layers_[l + 1];
    const std::size_t m = up.size();
    for (std::size_t i = 0; i < m; ++i) {
      const auto p = static_cast<std::uint32_t>(tree.parent(up[i])) - base;
      const auto next = static_cast<std::uint32_t>(tree.parent(up[(i + 1) % m])) - base;
      const std::uint32_t fans = (i + 1 < m) ? next - p : next + k - p;
      t.arc_start_[up[i]] = p;
      t.arc_len_[up[i]] = fans + 1;
      for (std::uint32_t f = 1; f <= fans; ++f) t.edges_.push_back({up[i], base + (p + f) % k, EdgeTag::Fan});
    }
  }
  t.ordered_ = t.layers_;
  t.index_levels();
  return t;
}

Triangulation Triangulation::from_parts(std::vector<std::vector<std::uint32_t>> layers, std::vector<Edge> edges) {
  Parsed p = parse(layers, edges);
  Triangulation t;
  t.layers_ = std::move(layers);
  t.edges_ = std::move(edges);
  t.ordered_ = std::move(p.ordered);
  t.arc_start_ = std::move(p.arc_start);
  t.arc_len_ = std::move(p.arc_len);
  t.index_levels();
  return t;
}

void Triangulation::index_levels() {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.size();
  level_of_.assign(n, 0);
  pos_of_.assign(n, 0);
  for (std::uint32_t l = 0; l < ordered_.size(); ++l)
    for (std::uint32_t i = 0; i < ordered_[l].size(); ++i) {
      level_of_[ordered_[l][i]] = l;
      pos_of_[ordered_[l][i]] = i;
    }
}

std::vector<std::uint64_t> Triangulation::layer_sizes() const {
  std::vector<std::uint64_t> k;
  for (const auto& l : layers_) k.push_back(l.size());
  return k;
}

std::vector<std::array<std::uint32_t, 3>> Triangulation::strip_triangles(std::uint32_t level) const {
  std::vector<std::array<std::uint32_t, 3>> faces;
  if (level + 1 >= ordered_.size()) return faces;
  const auto& below = ordered_[level];
  const auto& up = ordered_[level + 1];
  const auto k = static_cast<std::uint32_t>(below.size());
  for (std::size_t i = 0; i < up.size(); ++i) {
    const auto u = up[i];
    const std::uint32_t s = arc_start_[u], len = arc_len_[u];
    for (std::uint32_t t = 0; t + 1 < len; ++t) faces.push_back({below[(s + t) % k], below[(s + t + 1) % k], u});
    faces.push_back({u, up[(i + 1) % up.size()], below[(s + len - 1) % k]});
  }
  return faces;
}

Triangulation tree_to_triangulation(const RootedPlanarTree& tree) { return Triangulation::from_tree(tree); }

RootedPlanarTree triangulation_to_tree(const Triangulation& tri) {
  const Parsed p = parse(tri.layers_, tri.edges_);
  std::vector<std::uint32_t> counts;
  counts.reserve(tri.vertex_count());
  for (std::size_t l = 0; l < p.ordered.size(); ++l) {
    std::vector<std::uint32_t> c(p.ordered[l].size(), 0);
    if (l + 1 < p.ordered.size())
      for (auto u : p.ordered[l + 1]) ++c[p.arc_start[u]];
    counts.insert(counts.end(), c.begin(), c.end());
  }
  return RootedPlanarTree(std::move(counts));
}

DistanceOracle::DistanceOracle(const Triangulation& tri, std::size_t cache_capacity)
    : capacity_(std::max<std::size_t>(cache_capacity, 1)) {
  const std::size_t n = tri.vertex_count();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& e : tri.edges()) {
    if (e.a == e.b) continue;
    adj[e.a].push_back(e.b);
    adj[e.b].push_back(e.a);
  }
  offsets_.push_back(0);
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    adjacency_.insert(adjacency_.end(), a.begin(), a.end());
    offsets_.push_back(static_cast<std::uint32_t>(adjacency_.size()));
  }
  level_of_.resize(n);
  for (std::uint32_t v = 0; v < n; ++v) level_of_[v] = tri.level_of(v);
  layers_ = tri.layer_sizes();
  root_ = tri.root_vertex();
  // Keep the cache within about 2^25 stored distances.
  capacity_ = std::min(capacity_, std::max<std::size_t>(1, (std::size_t{1} << 25) / std::max<std::size_t>(n, 1)));
}

std::span<const std::uint32_t> DistanceOracle::neighbours(std::uint32_t v) const {
  if (v >= vertex_count()) fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(v));
  return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
}

std::vector<std::uint32_t> DistanceOracle::bfs_distances(std::uint32_t source) const {
  if (source >= vertex_count()) fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(source));
  return bfs(source);
}

std::vector<std::uint32_t> DistanceOracle::bfs(std::uint32_t source) const {
  std::vector<std::uint32_t> dist(vertex_count(), kUnreachable);
  std::vector<std::uint32_t> queue{source};
  queue.reserve(vertex_count());
  dist[source] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const auto v = queue[head];
    for (auto i = offsets_[v]; i < offsets_[v + 1]; ++i) {
      const auto w = adjacency_[i];
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::shared_ptr<const std::vector<std::uint32_t>> DistanceOracle::distances_from(std::uint32_t source) const {
  if (source >= vertex_count()) fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(source));
  {
    std::lock_guard lock(mutex_);
    auto it = cache_.find(source);
    if (it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
  }
  auto result = std::make_shared<const std::vector<std::uint32_t>>(bfs(source));
  std::lock_guard lock(mutex_);
  auto it = cache_.find(source);
  if (it != cache_.end()) return it->second.first;
  lru_.push_front(source);
  cache_.emplace(source, std::make_pair(result, lru_.begin()));
  while (cache_.size() > capacity_) {
    cache_.erase(lru_.back());
    lru_.pop_back();
  }
  return result;
}

std::uint32_t DistanceOracle::distance(std::uint32_t i, std::uint32_t j) const {
  if (j >= vertex_count()) fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(j));
  if (i == j) {
    if (i >= vertex_count()) fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(i));
    return 0;
  }
  return (*distances_from(i))[j];
}

std::uint32_t graph_distance(const DistanceOracle& oracle, std::uint32_t i, std::uint32_t j) { return oracle.distance(i, j); }

double growth_constant(std::span<const std::uint64_t> layers, double eps) {
  if (layers.empty()) fail(ErrorCode::EmptyInput, "no layer counts");
  if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::ConfigInvalid, "eps must lie in (0, 1)");
  double c = 0.0;
  for (std::size_t i = 2; i < layers.size(); ++i) {
    const double di = static_cast<double>(i);
    c = std::max(c, static_cast<double>(layers[i]) / (di * std::pow(std::log(di), 0.5 + eps)));
  }
  return c;
}

LayerBound growth_layer_bound(std::span<const std::uint64_t> layers, double eps) {
  const double c = growth_constant(layers, eps);
  return [c, eps](double i) { return i < 2.0 ? 0.0 : c * i * std::pow(std::log(i), 0.5 + eps); };
}

double majorant_tail(double from, const Decay& j, const LayerBound& bound) {
  if (j.support_radius() <= from || j.is_zero()) return 0.0;
  const double start = std::max(std::floor(from) + 1.0, 2.0);
  const double scale = decay_scale(j);
  return decreasing_tail([&](double x) { return scale * bound(x) * decay_majorant(x); }, start);
}

SeriesBound j_layer_sum(std::span<const std::uint64_t> layers, const Decay& j, std::optional<LayerBound> bound) {
  j.check_admissible();
  if (layers.empty()) fail(ErrorCode::EmptyInput, "no layer counts");
  SeriesBound out;
  for (std::size_t i = 1; i < layers.size(); ++i) out.value += static_cast<double>(layers[i]) * j(static_cast<double>(i));
  const LayerBound b = bound ? *bound : growth_layer_bound(layers);
  out.tail_bound = majorant_tail(static_cast<double>(layers.size() - 1), j, b);
  return out;
}

SeriesBound interaction_moment(const DistanceOracle& oracle, const Decay& j, std::uint32_t radius) {
  SeriesBound out;
  std::size_t worst_beyond = 0;
  const std::size_t n = oracle.vertex_count();
  for (std::uint32_t v = 0; v < n; ++v) {
    const auto dist = oracle.distances_from(v);
    double acc = 0.0;
    std::size_t beyond = 0;
    for (std::uint32_t w = 0; w < n; ++w) {
      const auto d = (*dist)[w];
      if (d == 0 || d == DistanceOracle::kUnreachable) continue;
      if (d > radius) {
        ++beyond;
        continue;
      }
      const double r = d;
      acc += j(r) * r * r;
    }
    if (acc > out.value || v == 0) {
      out.value = acc;
      out.argmax = v;
    }
    worst_beyond = std::max(worst_beyond, beyond);
  }
  out.tail_bound = worst_beyond == 0 ? 0.0 : static_cast<double>(worst_beyond) * j.sup_weighted_square(radius);
  return out;
}

double beyond_levels_tail(double level, double top, const Decay& j, const LayerBound& bound) {
  // Vertices above the recorded levels sit at distance >= their level - level.
  if (j.is_zero() || j.support_radius() <= top + 1.0 - level) return 0.0;
  const double scale = decay_scale(j);
  const double far = top + std::max(4096.0, 3.0 * (top + 1.0));
  double tail = 0.0;
  for (double l = top + 1.0; l <= far; l += 1.0) tail += bound(l) * scale * decay_majorant(l - level);
  tail += decreasing_tail([&](double x) { return bound(x) * scale * decay_majorant(2.0 * x / 3.0); }, far + 1.0);
  return tail;
}

SeriesBound coupling_constant(const DistanceOracle& oracle, const Decay& j, std::span<const std::uint32_t> sources) {
  std::vector<std::uint32_t> all;
  if (sources.empty()) {
    all.resize(oracle.vertex_count());
    for (std::uint32_t v = 0; v < all.size(); ++v) all[v] = v;
    sources = all;
  }
  const auto& layers = oracle.layer_sizes();
  const double top = static_cast<double>(layers.size() - 1);
  const LayerBound bound = growth_layer_bound(layers);
  std::map<std::uint32_t, double> tails;
  SeriesBound out;
  bool first = true;
  for (auto v : sources) {
    const auto dist = oracle.distances_from(v);
    double acc = 0.0;
    for (auto d : *dist)
      if (d != 0 && d != DistanceOracle::kUnreachable) acc += j(static_cast<double>(d));
    const std::uint32_t level = oracle.level_of(v);
    auto cached = tails.find(level);
    if (cached == tails.end()) cached = tails.emplace(level, beyond_levels_tail(level, top, j, bound)).first;
    const double tail = cached->second;
    if (first || acc > out.value) {
      out.value = acc;
      out.argmax = v;
    }
    out.tail_bound = std::max(out.tail_bound, tail);
    first = false;
  }
  out.value *= 2.0;
  out.tail_bound *= 2.0;
  return out;
}

}  // namespace lfk
