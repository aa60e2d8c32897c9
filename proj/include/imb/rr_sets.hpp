#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "imb/network.hpp"
#include "imb/rng.hpp"

namespace imb {

/// One reverse-reachable set; `width` counts the in-arcs examined (coin
/// tosses) while growing it.
struct RRSample {
  std::vector<NodeId> nodes;
  std::uint64_t width = 0;
};

/// Reverse BFS from a uniformly random root.
RRSample sample_rr_set(const DirectedNetwork& net, const WeightFunction& weights, Rng& rng);

/// Reverse BFS from a given root.
RRSample sample_rr_set_from(const DirectedNetwork& net, const WeightFunction& weights, NodeId root,
                            Rng& rng);

/// Sample-size parameters for the concave-error-interval rule.
struct CeiParams {
  double l = 1.0;          ///< failure exponent: guarantee holds w.p. 1 - n^-l
  double eps = 0.0;        ///< error scale; must not exceed 3/sqrt(n)
  double budget = 1.0;     ///< per-call budget b
  double max_cost = 1.0;   ///< largest node cost
  bool enforce_eps_bound = true;  ///< false voids the guarantee for large n

  /// Throws std::invalid_argument on non-positive values or eps > 3/sqrt(n).
  void validate(NodeId n) const;
};

/// Largest admissible eps for n nodes.
double max_cei_eps(NodeId n);

/// L = ceil(7 n (l ln n + n ln 2) / (opt_lower eps^2)).
std::size_t sample_size(NodeId n, const CeiParams& params, double opt_lower);

class FingerprintMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable collection of RR sets with an inverted index (node -> sets).
class RRCollection {
 public:
  RRCollection() = default;
  /// Assembles a collection from explicit sets; each set must be nonempty.
  RRCollection(NodeId node_count, const std::vector<std::vector<NodeId>>& sets,
               std::uint64_t total_width = 0, std::uint64_t weights_fingerprint = 0);

  NodeId node_count() const { return node_count_; }
  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const NodeId> set(std::size_t i) const {
    return {members_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::span<const std::uint32_t> sets_containing(NodeId v) const {
    const auto i = static_cast<std::size_t>(v);
    return {index_.data() + index_offsets_[i], index_offsets_[i + 1] - index_offsets_[i]};
  }
  std::uint64_t total_width() const { return total_width_; }
  double mean_width() const { return size() == 0 ? 0.0 : static_cast<double>(total_width_) / size(); }
  std::uint64_t weights_fingerprint() const { return fingerprint_; }

  /// Throws FingerprintMismatch unless built under exactly these weights.
  void require_weights(const WeightFunction& weights) const;

  /// F_R(S): fraction of sets that intersect the seed set.
  double coverage_fraction(std::span<const NodeId> seeds) const;
  /// n * F_R(S).
  double estimate_spread(std::span<const NodeId> seeds) const {
    return node_count_ * coverage_fraction(seeds);
  }

  /// Sets containing v that are not yet flagged in `covered` (one flag per set).
  std::size_t marginal_coverage(std::span<const char> covered, NodeId v) const;
  /// Flags every set containing v; returns how many were newly flagged.
  std::size_t cover(std::span<char> covered, NodeId v) const;

 private:
  friend class RRCollectionBuilder;
  void finalize_index();

  NodeId node_count_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> members_;
  std::vector<std::size_t> index_offsets_;
  std::vector<std::uint32_t> index_;
  std::uint64_t total_width_ = 0;
  std::uint64_t fingerprint_ = 0;
};

/// Appends RR sets one at a time, then freezes them into an RRCollection.
class RRCollectionBuilder {
 public:
  RRCollectionBuilder(const DirectedNetwork& net, const WeightFunction& weights);

  void add(const RRSample& sample);
  void grow_to(std::size_t count, Rng& rng);
  std::size_t size() const { return offsets_.size() - 1; }
  std::uint64_t total_width() const { return total_width_; }
  RRCollection finish() &&;

 private:
  const DirectedNetwork* net_;
  const WeightFunction* weights_;
  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> members_;
  std::uint64_t total_width_ = 0;
  // Reused BFS scratch.
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

struct BuildLimits {
  std::size_t max_sets = std::size_t{1} << 25;
};

/// Adaptive collection: starts from L' = sample_size(n, params, n), then
/// re-targets L = ceil(7 m (l ln n + n ln 2) min(b / c_max, 1) / (EPT eps^2))
/// with EPT estimated by the mean width, until the count reaches the target.
RRCollection build_collection(const DirectedNetwork& net, const WeightFunction& weights,
                              const CeiParams& params, Rng& rng, BuildLimits limits = {});

/// Target count implied by an EPT estimate; saturates at `cap`.
std::size_t ept_target(const DirectedNetwork& net, const CeiParams& params, double ept, std::size_t cap);

}  // namespace imb
