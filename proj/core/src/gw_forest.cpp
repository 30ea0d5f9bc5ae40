#include "lorentzfk/gw_forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "lorentzfk/error.hpp"

namespace lfk {
namespace {

constexpr double kSumTol = 1e-12;
constexpr double kMeanTol = 1e-9;
constexpr int kMaxTable = 1 << 22;
constexpr double kTailMass = 4e-16;

// Number of zero bits before the first one bit in a fair bit stream.
std::uint32_t fair_geometric(Stream& rng) {
  std::uint32_t zeros = 0;
  for (;;) {
    const std::uint64_t w = rng();
    if (w != 0) return zeros + static_cast<std::uint32_t>(std::countr_zero(w));
    zeros += 64;
  }
}

// Zeros before the `count`-th one bit: the sum of `count` fair geometrics.
std::uint64_t fair_negative_binomial(std::uint64_t count, Stream& rng) {
  std::uint64_t zeros = 0;
  while (count > 0) {
    std::uint64_t w = rng();
    const auto ones = static_cast<std::uint64_t>(std::popcount(w));
    if (ones < count) {
      zeros += 64 - ones;
      count -= ones;
      continue;
    }
    for (std::uint64_t i = 1; i < count; ++i) w &= w - 1;
    const auto pos = static_cast<std::uint64_t>(std::countr_zero(w));
    zeros += pos - (count - 1);
    count = 0;
  }
  return zeros;
}

std::uint64_t fair_popcount(std::uint64_t count, Stream& rng) {
  std::uint64_t ones = 0;
  while (count >= 64) {
    ones += static_cast<std::uint64_t>(std::popcount(rng()));
    count -= 64;
  }
  if (count > 0) ones += static_cast<std::uint64_t>(std::popcount(rng() & ((std::uint64_t{1} << count) - 1)));
  return ones;
}

std::uint32_t invert_cdf(const std::vector<double>& cdf, double u, const std::function<double(int)>& pmf) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it != cdf.end()) return static_cast<std::uint32_t>(it - cdf.begin());
  // Mass beyond the table (below 4e-16 by construction): walk the pmf.
  double acc = cdf.empty() ? 0.0 : cdf.back();
  auto k = static_cast<int>(cdf.size());
  while (pmf && k < (1 << 30)) {
    acc += pmf(k);
    if (u < acc) return static_cast<std::uint32_t>(k);
    ++k;
  }
  return static_cast<std::uint32_t>(cdf.empty() ? 0 : cdf.size() - 1);
}

}  // namespace

OffspringDistribution OffspringDistribution::validate_critical(const std::map<int, double>& probs) {
  if (probs.empty()) fail(ErrorCode::NotAProbability, "empty offspring law");
  double sum = 0.0, mean = 0.0, second = 0.0;
  for (const auto& [k, p] : probs) {
    if (k < 0) fail(ErrorCode::NotAProbability, "negative offspring count " + std::to_string(k));
    if (!(p >= 0.0) || !std::isfinite(p)) fail(ErrorCode::NotAProbability, "p_" + std::to_string(k) + " is not a probability");
    sum += p;
    mean += k * p;
    second += static_cast<double>(k) * k * p;
  }
  if (std::abs(sum - 1.0) > kSumTol) fail(ErrorCode::NotAProbability, "probabilities sum to " + std::to_string(sum));
  if (std::abs(mean - 1.0) > kMeanTol) fail(ErrorCode::NotCritical, "mean offspring " + std::to_string(mean));

  OffspringDistribution d;
  d.kind_ = Kind::Finite;
  d.name_ = "finite";
  int kmax = 0;
  for (const auto& [k, p] : probs)
    if (p > 0.0) kmax = std::max(kmax, k);
  d.finite_.assign(static_cast<std::size_t>(kmax) + 1, 0.0);
  for (const auto& [k, p] : probs)
    if (k <= kmax) d.finite_[static_cast<std::size_t>(k)] = p;
  d.max_support_ = kmax;
  d.mean_ = mean;
  d.variance_ = second - mean * mean;
  d.build_table();
  return d;
}

OffspringDistribution OffspringDistribution::geometric() {
  OffspringDistribution d;
  d.kind_ = Kind::Geometric;
  d.name_ = "geometric";
  d.pmf_ = [](int k) { return k < 0 ? 0.0 : std::ldexp(1.0, -(k + 1)); };
  d.mean_ = 1.0;
  d.variance_ = 2.0;
  d.max_support_ = -1;
  d.build_table();
  return d;
}

OffspringDistribution OffspringDistribution::binary() {
  auto d = validate_critical({{0, 0.5}, {2, 0.5}});
  d.name_ = "binary";
  return d;
}

OffspringDistribution OffspringDistribution::closed_form(std::string name, std::function<double(int)> pmf, double mean,
                                                         double second_moment) {
  if (!pmf) fail(ErrorCode::NotAProbability, "closed-form law without pmf");
  if (!std::isfinite(second_moment)) fail(ErrorCode::InfiniteVariance, name + ": second moment diverges");
  if (std::abs(mean - 1.0) > kMeanTol) fail(ErrorCode::NotCritical, name + ": mean " + std::to_string(mean));
  double sum = 0.0;
  for (int k = 0; k < kMaxTable && 1.0 - sum > 1e-16; ++k) {
    const double p = pmf(k);
    if (!(p >= 0.0)) fail(ErrorCode::NotAProbability, name + ": negative mass at " + std::to_string(k));
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTol) fail(ErrorCode::NotAProbability, name + ": mass sums to " + std::to_string(sum));
  OffspringDistribution d;
  d.kind_ = Kind::ClosedForm;
  d.name_ = std::move(name);
  d.pmf_ = std::move(pmf);
  d.mean_ = mean;
  d.variance_ = second_moment - mean * mean;
  d.max_support_ = -1;
  d.build_table();
  return d;
}

void OffspringDistribution::build_table() {
  cdf_.clear();
  double acc = 0.0;
  if (kind_ == Kind::Finite) {
    for (double p : finite_) cdf_.push_back(acc += p);
    cdf_.back() = std::max(cdf_.back(), 1.0);
    return;
  }
  // Stop once the remaining mass is below double resolution near one.
  for (int k = 0; k < kMaxTable && 1.0 - acc > kTailMass; ++k) cdf_.push_back(acc += pmf_(k));
}

double OffspringDistribution::prob(int k) const {
  if (k < 0) return 0.0;
  if (kind_ == Kind::Finite) return k < static_cast<int>(finite_.size()) ? finite_[static_cast<std::size_t>(k)] : 0.0;
  return pmf_(k);
}

std::uint32_t OffspringDistribution::sample(Stream& rng) const {
  if (kind_ == Kind::Geometric) return fair_geometric(rng);
  return invert_cdf(cdf_, rng.uniform(), pmf_);
}

std::uint64_t OffspringDistribution::sample_sum(std::uint64_t count, Stream& rng) const {
  if (kind_ == Kind::Geometric) return fair_negative_binomial(count, rng);
  if (kind_ == Kind::Finite && finite_.size() == 3 && finite_[0] == 0.5 && finite_[2] == 0.5)
    return 2 * fair_popcount(count, rng);
  std::uint64_t total = 0;
  for (std::uint64_t i = 0; i < count; ++i) total += sample(rng);
  return total;
}

SizeBiasedDistribution::SizeBiasedDistribution(const OffspringDistribution& base) : base_(base) {
  if (base_.kind() == OffspringDistribution::Kind::Geometric) return;
  double acc = 0.0;
  const int kmax = base_.max_support() >= 0 ? base_.max_support() : kMaxTable - 1;
  for (int k = 0; k <= kmax && 1.0 - acc > kTailMass; ++k) cdf_.push_back(acc += prob(k));
  if (base_.max_support() >= 0) cdf_.back() = std::max(cdf_.back(), 1.0);
}

std::uint32_t SizeBiasedDistribution::sample(Stream& rng) const {
  // k 2^-(k+1) is one plus the sum of two fair geometrics.
  if (base_.kind() == OffspringDistribution::Kind::Geometric) return 1 + fair_geometric(rng) + fair_geometric(rng);
  const OffspringDistribution& b = base_;
  return invert_cdf(cdf_, rng.uniform(), [&b](int k) { return k * b.prob(k); });
}

SizeBiasedDistribution size_bias(const OffspringDistribution& dist) { return SizeBiasedDistribution(dist); }

RootedPlanarTree::RootedPlanarTree(std::vector<std::uint32_t> child_counts,
                                   std::optional<std::vector<std::uint32_t>> spine)
    : child_counts_(std::move(child_counts)), spine_(std::move(spine)) {
  const std::size_t n = child_counts_.size();
  if (n == 0) fail(ErrorCode::MalformedTree, "tree without root");
  if (n > std::numeric_limits<std::uint32_t>::max() / 2) fail(ErrorCode::MalformedTree, "tree too large");
  level_offset_ = {0, 1};
  std::uint64_t begin = 0, end = 1;
  for (;;) {
    std::uint64_t next = 0;
    for (std::uint64_t v = begin; v < end; ++v) next += child_counts_[v];
    if (next == 0) break;
    if (end + next > n) fail(ErrorCode::MalformedTree, "child counts exceed the vertex count");
    begin = end;
    end += next;
    level_offset_.push_back(static_cast<std::uint32_t>(end));
  }
  if (end != n) fail(ErrorCode::MalformedTree, "child counts leave vertices unreachable from the root");

  first_child_.resize(n);
  parent_.assign(n, -1);
  level_.resize(n);
  std::uint32_t next_child = 1;
  for (std::uint32_t lvl = 0; lvl + 1 < level_offset_.size(); ++lvl) {
    for (std::uint32_t v = level_offset_[lvl]; v < level_offset_[lvl + 1]; ++v) {
      level_[v] = lvl;
      first_child_[v] = next_child;
      for (std::uint32_t c = 0; c < child_counts_[v]; ++c) parent_[next_child + c] = v;
      next_child += child_counts_[v];
    }
  }

  if (spine_) {
    const auto& s = *spine_;
    if (s.size() != static_cast<std::size_t>(height()) + 1) fail(ErrorCode::MalformedTree, "spine must reach the top level");
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= n || level_[s[i]] != i) fail(ErrorCode::MalformedTree, "spine vertex on the wrong level");
      if (i > 0 && parent_[s[i]] != static_cast<std::int64_t>(s[i - 1])) fail(ErrorCode::MalformedTree, "spine is not a path");
    }
  }
}

RootedPlanarTree RootedPlanarTree::from_parents(std::span<const std::int64_t> parents, std::span<const std::int64_t> heights) {
  const std::size_t n = parents.size();
  if (n == 0 || heights.size() != n) fail(ErrorCode::MalformedTree, "parent and height arrays disagree");
  if (parents[0] != -1 || heights[0] != 0) fail(ErrorCode::MalformedTree, "vertex 0 must be the root at height 0");
  std::vector<std::vector<std::uint32_t>> children(n);
  for (std::size_t v = 1; v < n; ++v) {
    const std::int64_t p = parents[v];
    if (p < 0 || static_cast<std::size_t>(p) >= n) fail(ErrorCode::MalformedTree, "vertex " + std::to_string(v) + " has no valid parent");
    if (heights[v] != heights[static_cast<std::size_t>(p)] + 1)
      fail(ErrorCode::MalformedTree, "height of vertex " + std::to_string(v) + " is not parent height + 1");
    children[static_cast<std::size_t>(p)].push_back(static_cast<std::uint32_t>(v));
  }
  std::vector<std::uint32_t> order{0};
  order.reserve(n);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (auto c : children[order[i]]) order.push_back(c);
  if (order.size() != n) fail(ErrorCode::MalformedTree, "vertices unreachable from the root");
  std::vector<std::uint32_t> counts(n);
  for (std::size_t i = 0; i < n; ++i) counts[i] = static_cast<std::uint32_t>(children[order[i]].size());
  return RootedPlanarTree(std::move(counts));
}

std::vector<std::uint32_t> RootedPlanarTree::dfs_order() const {
  std::vector<std::uint32_t> out;
  out.reserve(vertex_count());
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    out.push_back(v);
    for (std::uint32_t c = child_counts_[v]; c > 0; --c) stack.push_back(first_child_[v] + c - 1);
  }
  return out;
}

RootedPlanarTree sample_gw_tree(const OffspringDistribution& dist, std::uint32_t max_height, Stream& rng) {
  std::vector<std::uint32_t> counts{0};
  std::size_t begin = 0, end = 1;
  for (std::uint32_t lvl = 0; lvl < max_height && begin < end; ++lvl) {
    std::size_t next = 0;
    for (std::size_t v = begin; v < end; ++v) next += counts[v] = dist.sample(rng);
    counts.resize(end + next, 0);
    begin = end;
    end += next;
  }
  return RootedPlanarTree(std::move(counts));
}

RootedPlanarTree sample_sb_tree(const OffspringDistribution& dist, std::uint32_t height, Stream& rng) {
  if (height < 1) fail(ErrorCode::MalformedTree, "size-biased tree needs height >= 1");
  const SizeBiasedDistribution sb(dist);
  std::vector<std::uint32_t> counts{0};
  std::vector<std::uint32_t> spine{0};
  std::size_t begin = 0, end = 1;
  for (std::uint32_t lvl = 0; lvl < height; ++lvl) {
    std::size_t next = 0;
    std::uint32_t spine_child = 0;
    for (std::size_t v = begin; v < end; ++v) {
      if (v == spine.back()) {
        counts[v] = sb.sample(rng);
        spine_child = static_cast<std::uint32_t>(end + next + rng.below(counts[v]));
      } else {
        counts[v] = dist.sample(rng);
      }
      next += counts[v];
    }
    spine.push_back(spine_child);
    counts.resize(end + next, 0);
    begin = end;
    end += next;
  }
  return RootedPlanarTree(std::move(counts), std::move(spine));
}

std::vector<std::uint64_t> sample_sb_layers(const OffspringDistribution& dist, std::uint32_t height, Stream& rng) {
  const SizeBiasedDistribution sb(dist);
  std::vector<std::uint64_t> k{1};
  k.reserve(static_cast<std::size_t>(height) + 1);
  for (std::uint32_t lvl = 0; lvl < height; ++lvl) {
    const std::uint64_t spine = sb.sample(rng);
    k.push_back(spine + dist.sample_sum(k.back() - 1, rng));
  }
  return k;
}

std::vector<std::uint64_t> layer_sizes(const RootedPlanarTree& tree) {
  std::vector<std::uint64_t> k(static_cast<std::size_t>(tree.height()) + 1);
  for (std::uint32_t n = 0; n <= tree.height(); ++n) k[n] = tree.level_size(n);
  return k;
}

}  // namespace lfk
