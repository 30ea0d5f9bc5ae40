#include "lorentzfk/loops.hpp"

#include <algorithm>
#include <string>

#include "lorentzfk/error.hpp"

namespace lfk {

LoopConfiguration::LoopConfiguration(double beta, std::size_t slices, std::size_t dim)
    : beta_(beta), slices_(slices), dim_(dim) {
  if (!(beta > 0.0)) fail(ErrorCode::NonpositiveBeta, "beta = " + std::to_string(beta));
  if (slices < 1) fail(ErrorCode::BadSliceCount, "a path needs L >= 1");
}

std::size_t LoopConfiguration::index_of(std::uint32_t vertex) const noexcept {
  return static_cast<std::size_t>(std::lower_bound(vertices_.begin(), vertices_.end(), vertex) - vertices_.begin());
}

void LoopConfiguration::set(std::uint32_t vertex, DiscretizedPath path) {
  if (path.beta() != beta_ || path.slices() != slices_ || path.dim() != dim_)
    fail(ErrorCode::MismatchedPaths, "path at vertex " + std::to_string(vertex) + " has different beta, L or d");
  const std::size_t i = index_of(vertex);
  if (i < vertices_.size() && vertices_[i] == vertex) {
    paths_[i] = std::move(path);
    return;
  }
  vertices_.insert(vertices_.begin() + static_cast<std::ptrdiff_t>(i), vertex);
  paths_.insert(paths_.begin() + static_cast<std::ptrdiff_t>(i), std::move(path));
}

bool LoopConfiguration::contains(std::uint32_t vertex) const noexcept {
  const std::size_t i = index_of(vertex);
  return i < vertices_.size() && vertices_[i] == vertex;
}

const DiscretizedPath& LoopConfiguration::at(std::uint32_t vertex) const {
  const std::size_t i = index_of(vertex);
  if (i >= vertices_.size() || vertices_[i] != vertex) fail(ErrorCode::UnknownVertex, "no path at vertex " + std::to_string(vertex));
  return paths_[i];
}

DiscretizedPath& LoopConfiguration::at(std::uint32_t vertex) {
  return const_cast<DiscretizedPath&>(static_cast<const LoopConfiguration&>(*this).at(vertex));
}

bool LoopConfiguration::all_loops() const noexcept {
  return std::all_of(paths_.begin(), paths_.end(), [](const DiscretizedPath& p) { return p.is_loop(); });
}

LoopConfiguration LoopConfiguration::merged(const LoopConfiguration& other) const {
  if (other.empty()) return *this;
  if (empty()) return other;
  LoopConfiguration out = *this;
  for (std::size_t i = 0; i < other.size(); ++i) {
    if (contains(other.vertices_[i]))
      fail(ErrorCode::OverlappingSupports, "vertex " + std::to_string(other.vertices_[i]) + " in both configurations");
    out.set(other.vertices_[i], other.paths_[i]);
  }
  return out;
}

LoopConfiguration LoopConfiguration::restricted(const std::vector<std::uint32_t>& keep) const {
  LoopConfiguration out(beta_, slices_, dim_);
  for (auto v : keep)
    if (contains(v)) out.set(v, at(v));
  return out;
}

LoopConfiguration LoopConfiguration::without(const std::vector<std::uint32_t>& drop) const {
  LoopConfiguration out(beta_, slices_, dim_);
  for (std::size_t i = 0; i < size(); ++i)
    if (std::find(drop.begin(), drop.end(), vertices_[i]) == drop.end()) out.set(vertices_[i], paths_[i]);
  return out;
}

LoopConfiguration LoopConfiguration::sample_free(const std::vector<std::uint32_t>& vertices, double beta,
                                                 std::size_t slices, std::size_t dim, Stream& rng) {
  LoopConfiguration out(beta, slices, dim);
  for (auto v : vertices) {
    TorusPoint x(dim);
    for (auto& w : x.words()) w = rng();
    out.set(v, sample_loop(x, beta, slices, rng));
  }
  return out;
}

void ClassicalBoundary::set(std::uint32_t vertex, TorusPoint point) {
  auto it = std::lower_bound(points_.begin(), points_.end(), vertex,
                             [](const auto& p, std::uint32_t v) { return p.first < v; });
  if (it != points_.end() && it->first == vertex) {
    it->second = std::move(point);
    return;
  }
  points_.insert(it, {vertex, std::move(point)});
}

bool ClassicalBoundary::contains(std::uint32_t vertex) const noexcept {
  auto it = std::lower_bound(points_.begin(), points_.end(), vertex,
                             [](const auto& p, std::uint32_t v) { return p.first < v; });
  return it != points_.end() && it->first == vertex;
}

}  // namespace lfk
