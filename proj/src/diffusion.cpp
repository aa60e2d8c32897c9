#include "imb/diffusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace imb {

std::vector<NodeId> canonical_seeds(const DirectedNetwork& net, std::span<const NodeId> seeds) {
  std::vector<NodeId> out(seeds.begin(), seeds.end());
  for (NodeId v : out) {
    if (!net.contains(v)) throw std::out_of_range("seed " + std::to_string(v) + " is not a node");
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

CascadeOutcome simulate_cascade(const DirectedNetwork& net, const WeightFunction& weights,
                                std::span<const NodeId> seeds, Rng& rng) {
  if (weights.size() != net.arc_count()) throw std::invalid_argument("weights do not cover every arc");
  CascadeOutcome out;
  out.activated = canonical_seeds(net, seeds);
  std::vector<char> active(static_cast<std::size_t>(net.node_count()), 0);
  for (NodeId s : out.activated) active[static_cast<std::size_t>(s)] = 1;

  // `activated` doubles as the BFS queue.
  for (std::size_t head = 0; head < out.activated.size(); ++head) {
    const NodeId u = out.activated[head];
    for (ArcId e : net.out_arcs(u)) {
      const bool success = rng.bernoulli(weights[e]);
      out.observations.push_back({e, success});
      const NodeId v = net.arc(e).tail;
      if (success && !active[static_cast<std::size_t>(v)]) {
        active[static_cast<std::size_t>(v)] = 1;
        out.activated.push_back(v);
      }
    }
  }
  return out;
}

double exact_spread(const DirectedNetwork& net, const WeightFunction& weights,
                    std::span<const NodeId> seeds) {
  const ArcId m = net.arc_count();
  if (m > kExactSpreadMaxArcs) {
    throw std::length_error("exact spread enumerates 2^m realizations; m = " + std::to_string(m) +
                            " exceeds " + std::to_string(kExactSpreadMaxArcs));
  }
  if (weights.size() != m) throw std::invalid_argument("weights do not cover every arc");
  const std::vector<NodeId> start = canonical_seeds(net, seeds);
  if (start.empty()) return 0.0;

  const auto n = static_cast<std::size_t>(net.node_count());
  std::vector<char> reached(n);
  std::vector<NodeId> queue;
  queue.reserve(n);
  double expected = 0.0;
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    double prob = 1.0;
    for (ArcId e = 0; e < m && prob > 0.0; ++e) prob *= (mask >> e) & 1U ? weights[e] : 1.0 - weights[e];
    if (prob == 0.0) continue;

    std::fill(reached.begin(), reached.end(), 0);
    queue.assign(start.begin(), start.end());
    for (NodeId s : start) reached[static_cast<std::size_t>(s)] = 1;
    for (std::size_t i = 0; i < queue.size(); ++i) {
      for (ArcId e : net.out_arcs(queue[i])) {
        const NodeId v = net.arc(e).tail;
        if (((mask >> e) & 1U) && !reached[static_cast<std::size_t>(v)]) {
          reached[static_cast<std::size_t>(v)] = 1;
          queue.push_back(v);
        }
      }
    }
    expected += prob * static_cast<double>(queue.size());
  }
  return expected;
}

std::vector<double> exact_spread_table(const DirectedNetwork& net, const WeightFunction& weights) {
  const NodeId n = net.node_count();
  const ArcId m = net.arc_count();
  if (n > kSpreadTableMaxNodes || m > kExactSpreadMaxArcs) {
    throw std::length_error("spread table needs n <= 16 and m <= 20");
  }
  if (weights.size() != m) throw std::invalid_argument("weights do not cover every arc");

  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> table(subsets, 0.0);
  std::vector<std::uint32_t> reach(static_cast<std::size_t>(n));
  std::vector<std::uint32_t> subset_reach(subsets);
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    double prob = 1.0;
    for (ArcId e = 0; e < m && prob > 0.0; ++e) prob *= (mask >> e) & 1U ? weights[e] : 1.0 - weights[e];
    if (prob == 0.0) continue;

    // Closure of single-node reach sets under the live arcs.
    for (NodeId v = 0; v < n; ++v) reach[static_cast<std::size_t>(v)] = 1U << v;
    for (bool changed = true; changed;) {
      changed = false;
      for (ArcId e = 0; e < m; ++e) {
        if (!((mask >> e) & 1U)) continue;
        auto& from = reach[static_cast<std::size_t>(net.arc(e).head)];
        const auto merged = from | reach[static_cast<std::size_t>(net.arc(e).tail)];
        if (merged != from) {
          from = merged;
          changed = true;
        }
      }
    }
    subset_reach[0] = 0;
    for (std::size_t s = 1; s < subsets; ++s) {
      const int low = std::countr_zero(s);
      subset_reach[s] = subset_reach[s & (s - 1)] | reach[static_cast<std::size_t>(low)];
      table[s] += prob * std::popcount(subset_reach[s]);
    }
  }
  return table;
}

SpreadEstimate monte_carlo_spread(const DirectedNetwork& net, const WeightFunction& weights,
                                  std::span<const NodeId> seeds, std::size_t simulations, Rng& rng) {
  if (simulations == 0) throw std::invalid_argument("monte carlo spread needs at least one simulation");
  const std::vector<NodeId> start = canonical_seeds(net, seeds);
  if (start.empty()) return {};

  // Welford running moments.
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 1; i <= simulations; ++i) {
    const auto x = static_cast<double>(simulate_cascade(net, weights, start, rng).activated.size());
    const double delta = x - mean;
    mean += delta / static_cast<double>(i);
    m2 += delta * (x - mean);
  }
  const auto k = static_cast<double>(simulations);
  const double variance = simulations > 1 ? m2 / (k - 1.0) : 0.0;
  return {mean, std::sqrt(variance / k)};
}

}  // namespace imb
