#include "imb/oracle.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "imb/diffusion.hpp"

namespace imb {

SpreadEvaluator SpreadEvaluator::exact(const DirectedNetwork& net, const WeightFunction& weights) {
  if (net.arc_count() > kExactSpreadMaxArcs) {
    throw std::length_error("exact evaluator limited to m <= 20 arcs");
  }
  SpreadEvaluator e;
  e.kind_ = EvaluatorKind::exact;
  e.net_ = &net;
  e.weights_ = &weights;
  return e;
}

SpreadEvaluator SpreadEvaluator::monte_carlo(const DirectedNetwork& net, const WeightFunction& weights,
                                             std::size_t simulations, std::uint64_t seed) {
  if (simulations == 0) throw std::invalid_argument("monte carlo evaluator needs simulations >= 1");
  SpreadEvaluator e;
  e.kind_ = EvaluatorKind::monte_carlo;
  e.net_ = &net;
  e.weights_ = &weights;
  e.simulations_ = simulations;
  e.seed_ = seed;
  return e;
}

SpreadEvaluator SpreadEvaluator::rr_collection(const RRCollection& collection, const WeightFunction& weights) {
  collection.require_weights(weights);
  SpreadEvaluator e;
  e.kind_ = EvaluatorKind::rr_collection;
  e.weights_ = &weights;
  e.collection_ = &collection;
  return e;
}

double SpreadEvaluator::spread(std::span<const NodeId> seeds) const {
  switch (kind_) {
    case EvaluatorKind::exact:
      return exact_spread(*net_, *weights_, seeds);
    case EvaluatorKind::monte_carlo: {
      Rng rng(seed_);
      return monte_carlo_spread(*net_, *weights_, seeds, simulations_, rng).mean;
    }
    case EvaluatorKind::rr_collection:
      return collection_->estimate_spread(seeds);
  }
  return 0.0;
}

namespace {

// Ratios closer than this (relative) count as ties, so mathematically equal
// gains that differ only by rounding resolve to the smaller node id.
constexpr double kTieTolerance = 1e-12;

bool strictly_better(double ratio, double best) {
  return ratio > best + kTieTolerance * std::max(1.0, std::abs(best));
}

}  // namespace

GreedyChain greedy_chain(const DirectedNetwork& net, const SpreadEvaluator& eval, double budget) {
  if (!(budget > 0.0)) throw std::invalid_argument("budget must be positive");
  const NodeId n = net.node_count();
  const RRCollection* coll = eval.kind() == EvaluatorKind::rr_collection ? eval.collection() : nullptr;
  if (coll != nullptr && coll->node_count() != n) {
    throw std::invalid_argument("RR collection does not match the network");
  }

  GreedyChain chain;
  chain.cost.push_back(0.0);
  chain.spread.push_back(0.0);
  std::vector<char> chosen(static_cast<std::size_t>(n), 0);
  std::vector<char> covered(coll != nullptr ? coll->size() : 0, 0);
  std::size_t covered_count = 0;
  const double per_set = coll != nullptr && coll->size() > 0 ? static_cast<double>(n) / coll->size() : 0.0;
  std::vector<NodeId> trial;

  for (NodeId step = 0; step < n; ++step) {
    NodeId best = -1;
    double best_ratio = -std::numeric_limits<double>::infinity();
    double best_spread = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      if (chosen[static_cast<std::size_t>(v)]) continue;
      double with_v = 0.0;
      if (coll != nullptr) {
        with_v = static_cast<double>(covered_count + coll->marginal_coverage(covered, v)) * per_set;
      } else {
        trial = chain.order;
        trial.push_back(v);
        with_v = eval.spread(trial);
      }
      const double ratio = (with_v - chain.spread.back()) / net.cost(v);
      if (best < 0 || strictly_better(ratio, best_ratio)) {
        best = v;
        best_ratio = ratio;
        best_spread = with_v;
      }
    }
    chosen[static_cast<std::size_t>(best)] = 1;
    if (coll != nullptr) covered_count += coll->cover(covered, best);
    chain.order.push_back(best);
    chain.cost.push_back(chain.cost.back() + net.cost(best));
    chain.spread.push_back(best_spread);
    if (chain.cost.back() > budget) return chain;
  }
  chain.exhausted = true;
  return chain;
}

TwoPointSolution two_point_lp(double f_minus, double f_plus, double c_minus, double c_plus, double budget) {
  if (c_minus > budget) {
    throw std::domain_error("two-point LP infeasible: cheaper set costs " + std::to_string(c_minus) +
                            " > budget " + std::to_string(budget));
  }
  TwoPointSolution s;
  if (c_plus <= budget) {
    if (f_plus >= f_minus) {
      s.p = 0.0;
      s.q = 1.0;
    }
  } else if (f_plus > f_minus) {
    s.q = std::min(1.0, (budget - c_minus) / (c_plus - c_minus));
    s.p = 1.0 - s.q;
    // Rounding in 1 - q can push the budget row one ulp over; back off q.
    while (s.q > 0.0 && s.p * c_minus + s.q * c_plus > budget) {
      s.q = std::nextafter(s.q, 0.0);
      s.p = 1.0 - s.q;
    }
  }
  s.value = s.p * f_minus + s.q * f_plus;
  return s;
}

double SeedLottery::expected_cost() const {
  double c = 0.0;
  for (const auto& o : support) c += o.probability * o.cost;
  return c;
}

double SeedLottery::expected_spread() const {
  double f = 0.0;
  for (const auto& o : support) f += o.probability * o.spread;
  return f;
}

SeedLottery oracle_imb(const DirectedNetwork& net, const SpreadEvaluator& eval, double budget) {
  const GreedyChain chain = greedy_chain(net, eval, budget);
  const std::size_t k = chain.length();
  SeedLottery lottery;
  if (chain.exhausted) {
    lottery.support.push_back({chain.order, 1.0, chain.cost[k], chain.spread[k]});
    return lottery;
  }
  const TwoPointSolution lp =
      two_point_lp(chain.spread[k - 1], chain.spread[k], chain.cost[k - 1], chain.cost[k], budget);
  if (lp.q == 0.0) {
    lottery.support.push_back({chain.prefix(k - 1), 1.0, chain.cost[k - 1], chain.spread[k - 1]});
  } else if (lp.p == 0.0) {
    lottery.support.push_back({chain.prefix(k), 1.0, chain.cost[k], chain.spread[k]});
  } else {
    lottery.support.push_back({chain.prefix(k - 1), lp.p, chain.cost[k - 1], chain.spread[k - 1]});
    lottery.support.push_back({chain.prefix(k), lp.q, chain.cost[k], chain.spread[k]});
  }
  return lottery;
}

SeedLottery oracle_imb_m(const DirectedNetwork& net, const WeightFunction& weights, double budget,
                         CeiParams params, Rng& rng, BuildLimits limits) {
  params.budget = budget;
  params.max_cost = net.max_cost();
  const RRCollection coll = build_collection(net, weights, params, rng, limits);
  return oracle_imb(net, SpreadEvaluator::rr_collection(coll, weights), budget);
}

ChainDistribution full_chain_lp(std::span<const ChainPoint> chain, double budget) {
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (chain[i].cost < chain[i - 1].cost) throw std::invalid_argument("chain costs must be nondecreasing");
  }
  ChainDistribution best;
  bool found = false;
  auto consider = [&](std::size_t i, std::size_t j, const TwoPointSolution& s) {
    if (found && !(s.value > best.value)) return;
    found = true;
    best.probabilities.assign(chain.size(), 0.0);
    best.probabilities[i] += s.p;
    best.probabilities[j] += s.q;
    best.value = s.value;
    best.expected_cost = s.p * chain[i].cost + s.q * chain[j].cost;
  };
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].cost > budget) continue;
    consider(i, i, {1.0, 0.0, chain[i].spread});
    for (std::size_t j = i + 1; j < chain.size(); ++j) {
      if (chain[j].cost <= budget) continue;
      consider(i, j, two_point_lp(chain[i].spread, chain[j].spread, chain[i].cost, chain[j].cost, budget));
    }
  }
  if (!found) throw std::domain_error("no chain prefix fits the budget");
  return best;
}

BruteForceOptimum brute_force_opt(const DirectedNetwork& net, const WeightFunction& weights, double budget) {
  const NodeId n = net.node_count();
  if (n > kBruteForceMaxNodes || net.arc_count() > kExactSpreadMaxArcs) {
    throw std::length_error("brute force optimum limited to n <= 12 and m <= 20");
  }
  const std::vector<double> f = exact_spread_table(net, weights);
  const std::size_t subsets = f.size();
  std::vector<double> cost(subsets, 0.0);
  std::vector<std::size_t> affordable, dear;
  for (std::size_t s = 0; s < subsets; ++s) {
    for (NodeId v = 0; v < n; ++v) {
      if ((s >> v) & 1U) cost[s] += net.cost(v);
    }
    (cost[s] <= budget ? affordable : dear).push_back(s);
  }
  if (affordable.empty()) throw std::domain_error("no seed set fits the budget");

  std::size_t lo = affordable.front(), hi = lo;
  TwoPointSolution best{1.0, 0.0, f[lo]};
  for (std::size_t s : affordable) {
    if (f[s] > best.value) {
      best = {1.0, 0.0, f[s]};
      lo = hi = s;
    }
    for (std::size_t t : dear) {
      if (f[t] <= f[s]) continue;
      const TwoPointSolution cand = two_point_lp(f[s], f[t], cost[s], cost[t], budget);
      if (cand.value > best.value) {
        best = cand;
        lo = s;
        hi = t;
      }
    }
  }
  auto members = [n](std::size_t mask) {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n; ++v) {
      if ((mask >> v) & 1U) out.push_back(v);
    }
    return out;
  };
  return {best.value, members(lo), members(hi), best.p, best.q};
}

const std::vector<NodeId>& draw_seed(const SeedLottery& lottery, Rng& rng) {
  if (lottery.support.empty()) throw std::invalid_argument("empty seed lottery");
  if (lottery.support.size() == 1) return lottery.support.front().seeds;
  return rng.uniform() < lottery.support[0].probability ? lottery.support[0].seeds : lottery.support[1].seeds;
}

}  // namespace imb
