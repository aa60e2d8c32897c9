#include "imb/rr_sets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace imb {

namespace {

// Grows the reverse-reachable set of `root` into `out`. `seen(v)` marks v and
// reports whether it was already present.
template <typename Seen>
std::uint64_t reverse_bfs(const DirectedNetwork& net, const WeightFunction& weights, NodeId root,
                          Rng& rng, std::vector<NodeId>& out, Seen&& seen) {
  std::uint64_t width = 0;
  const std::size_t first = out.size();
  out.push_back(root);
  seen(root);
  for (std::size_t i = first; i < out.size(); ++i) {
    for (ArcId e : net.in_arcs(out[i])) {
      ++width;
      const NodeId u = net.arc(e).head;
      // An already-collected source cannot change the set; its coin is
      // counted but not drawn.
      if (!seen.contains(u) && rng.bernoulli(weights[e])) {
        seen(u);
        out.push_back(u);
      }
    }
  }
  return width;
}

struct VisitedFlags {
  std::vector<char>& flags;
  void operator()(NodeId v) { flags[static_cast<std::size_t>(v)] = 1; }
  bool contains(NodeId v) const { return flags[static_cast<std::size_t>(v)] != 0; }
};

struct VisitedStamps {
  std::vector<std::uint32_t>& stamp;
  std::uint32_t epoch;
  void operator()(NodeId v) { stamp[static_cast<std::size_t>(v)] = epoch; }
  bool contains(NodeId v) const { return stamp[static_cast<std::size_t>(v)] == epoch; }
};

void check_weights(const DirectedNetwork& net, const WeightFunction& weights) {
  if (weights.size() != net.arc_count()) throw std::invalid_argument("weights do not cover every arc");
}

}  // namespace

RRSample sample_rr_set_from(const DirectedNetwork& net, const WeightFunction& weights, NodeId root,
                            Rng& rng) {
  check_weights(net, weights);
  if (!net.contains(root)) throw std::out_of_range("root " + std::to_string(root) + " is not a node");
  std::vector<char> flags(static_cast<std::size_t>(net.node_count()), 0);
  RRSample sample;
  sample.width = reverse_bfs(net, weights, root, rng, sample.nodes, VisitedFlags{flags});
  return sample;
}

RRSample sample_rr_set(const DirectedNetwork& net, const WeightFunction& weights, Rng& rng) {
  if (net.node_count() <= 0) throw std::invalid_argument("cannot sample an RR set from an empty graph");
  const auto root = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(net.node_count())));
  return sample_rr_set_from(net, weights, root, rng);
}

double max_cei_eps(NodeId n) { return 3.0 / std::sqrt(static_cast<double>(n)); }

void CeiParams::validate(NodeId n) const {
  if (!(l > 0.0)) throw std::invalid_argument("CEI exponent l must be positive");
  if (!(eps > 0.0)) throw std::invalid_argument("CEI eps must be positive");
  if (enforce_eps_bound && eps > max_cei_eps(n)) {
    throw std::invalid_argument("CEI eps " + std::to_string(eps) + " exceeds 3/sqrt(n) = " +
                                std::to_string(max_cei_eps(n)));
  }
  if (!(budget > 0.0)) throw std::invalid_argument("CEI budget must be positive");
  if (!(max_cost > 0.0)) throw std::invalid_argument("CEI max cost must be positive");
}

namespace {

double cei_numerator(NodeId n, double l) {
  const double nn = static_cast<double>(n);
  return 7.0 * (l * std::log(nn) + nn * std::log(2.0));
}

std::size_t ceil_count(double x, std::size_t cap) {
  if (!(x < static_cast<double>(cap))) return cap;
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

std::size_t sample_size(NodeId n, const CeiParams& params, double opt_lower) {
  params.validate(n);
  if (!(opt_lower > 0.0)) throw std::invalid_argument("OPT lower bound must be positive");
  const double l_count = static_cast<double>(n) * cei_numerator(n, params.l) /
                         (opt_lower * params.eps * params.eps);
  return ceil_count(l_count, std::numeric_limits<std::size_t>::max() / 2);
}

std::size_t ept_target(const DirectedNetwork& net, const CeiParams& params, double ept, std::size_t cap) {
  if (!(ept > 0.0)) return 0;
  const double ratio = std::min(params.budget / params.max_cost, 1.0);
  const double target = static_cast<double>(net.arc_count()) * cei_numerator(net.node_count(), params.l) *
                        ratio / (ept * params.eps * params.eps);
  return ceil_count(target, cap);
}

RRCollection::RRCollection(NodeId node_count, const std::vector<std::vector<NodeId>>& sets,
                           std::uint64_t total_width, std::uint64_t weights_fingerprint)
    : node_count_(node_count), total_width_(total_width), fingerprint_(weights_fingerprint) {
  offsets_.push_back(0);
  for (const auto& s : sets) {
    if (s.empty()) throw std::invalid_argument("RR sets must be nonempty");
    for (NodeId v : s) {
      if (v < 0 || v >= node_count_) throw std::out_of_range("RR set member is not a node");
      members_.push_back(v);
    }
    offsets_.push_back(members_.size());
  }
  finalize_index();
}

void RRCollection::finalize_index() {
  index_offsets_.assign(static_cast<std::size_t>(node_count_) + 1, 0);
  for (NodeId v : members_) ++index_offsets_[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 1; i < index_offsets_.size(); ++i) index_offsets_[i] += index_offsets_[i - 1];
  index_.assign(members_.size(), 0);
  std::vector<std::size_t> fill(index_offsets_.begin(), index_offsets_.end() - 1);
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      index_[fill[static_cast<std::size_t>(members_[k])]++] = static_cast<std::uint32_t>(i);
    }
  }
}

void RRCollection::require_weights(const WeightFunction& weights) const {
  if (weights.fingerprint() != fingerprint_) {
    throw FingerprintMismatch("RR collection was built under different edge weights");
  }
}

double RRCollection::coverage_fraction(std::span<const NodeId> seeds) const {
  if (size() == 0 || seeds.empty()) return 0.0;
  std::vector<char> hit(size(), 0);
  std::size_t count = 0;
  for (NodeId v : seeds) {
    if (v < 0 || v >= node_count_) throw std::out_of_range("seed is not a node");
    count += cover(hit, v);
  }
  return static_cast<double>(count) / static_cast<double>(size());
}

std::size_t RRCollection::marginal_coverage(std::span<const char> covered, NodeId v) const {
  std::size_t gain = 0;
  for (std::uint32_t i : sets_containing(v)) gain += covered[i] ? 0 : 1;
  return gain;
}

std::size_t RRCollection::cover(std::span<char> covered, NodeId v) const {
  std::size_t added = 0;
  for (std::uint32_t i : sets_containing(v)) {
    if (!covered[i]) {
      covered[i] = 1;
      ++added;
    }
  }
  return added;
}

RRCollectionBuilder::RRCollectionBuilder(const DirectedNetwork& net, const WeightFunction& weights)
    : net_(&net), weights_(&weights), stamp_(static_cast<std::size_t>(net.node_count()), 0) {
  check_weights(net, weights);
}

void RRCollectionBuilder::add(const RRSample& sample) {
  if (sample.nodes.empty()) throw std::invalid_argument("RR sets must be nonempty");
  members_.insert(members_.end(), sample.nodes.begin(), sample.nodes.end());
  offsets_.push_back(members_.size());
  total_width_ += sample.width;
}

void RRCollectionBuilder::grow_to(std::size_t count, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(net_->node_count());
  while (size() < count) {
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
    const auto root = static_cast<NodeId>(rng.index(n));
    total_width_ += reverse_bfs(*net_, *weights_, root, rng, members_, VisitedStamps{stamp_, epoch_});
    offsets_.push_back(members_.size());
  }
}

RRCollection RRCollectionBuilder::finish() && {
  RRCollection out;
  out.node_count_ = net_->node_count();
  out.offsets_ = std::move(offsets_);
  out.members_ = std::move(members_);
  out.total_width_ = total_width_;
  out.fingerprint_ = weights_->fingerprint();
  out.finalize_index();
  return out;
}

RRCollection build_collection(const DirectedNetwork& net, const WeightFunction& weights,
                              const CeiParams& params, Rng& rng, BuildLimits limits) {
  params.validate(net.node_count());
  RRCollectionBuilder builder(net, weights);
  const std::size_t initial =
      std::min(sample_size(net.node_count(), params, static_cast<double>(net.node_count())), limits.max_sets);
  builder.grow_to(initial, rng);
  for (;;) {
    const double ept = static_cast<double>(builder.total_width()) / static_cast<double>(builder.size());
    const std::size_t target = ept_target(net, params, ept, limits.max_sets);
    if (builder.size() >= target) break;
    builder.grow_to(target, rng);
  }
  return std::move(builder).finish();
}

}  // namespace imb
