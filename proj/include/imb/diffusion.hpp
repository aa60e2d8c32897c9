#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "imb/network.hpp"
#include "imb/rng.hpp"

namespace imb {

/// Realization of one arc whose head was activated.
struct Observation {
  ArcId arc;
  bool success;
};

/// Result of one Independent Cascade: activated nodes in activation order and
/// the semi-bandit feedback (every out-arc of every activated node, once).
struct CascadeOutcome {
  std::vector<NodeId> activated;
  std::vector<Observation> observations;
};

/// Breadth-first IC process. Seeds are deduplicated and processed in
/// ascending order; out-arcs of a node are flipped in arc-id order.
CascadeOutcome simulate_cascade(const DirectedNetwork& net, const WeightFunction& weights,
                                std::span<const NodeId> seeds, Rng& rng);

inline constexpr ArcId kExactSpreadMaxArcs = 20;

/// Expected number of activated nodes by enumeration of all 2^m arc
/// realizations. Throws std::length_error when m > 20.
double exact_spread(const DirectedNetwork& net, const WeightFunction& weights,
                    std::span<const NodeId> seeds);

inline constexpr NodeId kSpreadTableMaxNodes = 16;

/// Exact spreads of every subset at once, indexed by node bitmask
/// (bit v set <=> node v in the seed set). Requires n <= 16 and m <= 20.
std::vector<double> exact_spread_table(const DirectedNetwork& net, const WeightFunction& weights);

struct SpreadEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error of the activated count over `simulations`
/// independent cascades.
SpreadEstimate monte_carlo_spread(const DirectedNetwork& net, const WeightFunction& weights,
                                  std::span<const NodeId> seeds, std::size_t simulations, Rng& rng);

/// Deduplicated, sorted copy of a seed list; throws on ids outside the network.
std::vector<NodeId> canonical_seeds(const DirectedNetwork& net, std::span<const NodeId> seeds);

}  // namespace imb
