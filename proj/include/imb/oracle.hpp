#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "imb/network.hpp"
#include "imb/rng.hpp"
#include "imb/rr_sets.hpp"

namespace imb {

enum class EvaluatorKind { exact, monte_carlo, rr_collection };

/// Spread function f(S) seen by one oracle call. Non-owning: the network,
/// weights and collection must outlive the evaluator.
///
/// Monte Carlo evaluators reuse one seed for every query (common random
/// numbers), so repeated queries of the same set agree. Only the exact and
/// RR-collection evaluators carry approximation guarantees.
class SpreadEvaluator {
 public:
  static SpreadEvaluator exact(const DirectedNetwork& net, const WeightFunction& weights);
  static SpreadEvaluator monte_carlo(const DirectedNetwork& net, const WeightFunction& weights,
                                     std::size_t simulations, std::uint64_t seed);
  /// Throws FingerprintMismatch if the collection was built under other weights.
  static SpreadEvaluator rr_collection(const RRCollection& collection, const WeightFunction& weights);

  EvaluatorKind kind() const { return kind_; }
  double spread(std::span<const NodeId> seeds) const;
  const RRCollection* collection() const { return collection_; }

 private:
  EvaluatorKind kind_ = EvaluatorKind::exact;
  const DirectedNetwork* net_ = nullptr;
  const WeightFunction* weights_ = nullptr;
  const RRCollection* collection_ = nullptr;
  std::size_t simulations_ = 0;
  std::uint64_t seed_ = 0;
};

/// Greedy cost-ratio chain S_0 = {} c S_1 c ... c S_k. When the chain stops
/// early, c(S_k) > b >= c(S_{k-1}); otherwise it holds every node.
struct GreedyChain {
  std::vector<NodeId> order;   ///< v_1 .. v_k
  std::vector<double> cost;    ///< c(S_0) .. c(S_k)
  std::vector<double> spread;  ///< f(S_0) .. f(S_k)
  bool exhausted = false;      ///< true when the budget never broke the loop

  std::size_t length() const { return order.size(); }
  std::vector<NodeId> prefix(std::size_t i) const { return {order.begin(), order.begin() + i}; }
};

/// Adds argmax_v (f(S + v) - f(S)) / c(v) until the cost first exceeds b.
/// Ties go to the smallest node id.
GreedyChain greedy_chain(const DirectedNetwork& net, const SpreadEvaluator& eval, double budget);

struct TwoPointSolution {
  double p = 1.0;  ///< probability of the cheaper set
  double q = 0.0;  ///< probability of the dearer set
  double value = 0.0;
};

/// max p f_minus + q f_plus  s.t.  p c_minus + q c_plus <= b, p + q = 1, p, q >= 0.
/// The returned pair always satisfies the budget row exactly in floating point.
TwoPointSolution two_point_lp(double f_minus, double f_plus, double c_minus, double c_plus, double budget);

struct LotteryOutcome {
  std::vector<NodeId> seeds;
  double probability = 0.0;
  double cost = 0.0;
  double spread = 0.0;  ///< under the evaluator that produced the lottery
};

/// Distribution over one set, or two nested sets differing by one node.
struct SeedLottery {
  std::vector<LotteryOutcome> support;

  double expected_cost() const;
  double expected_spread() const;
};

SeedLottery oracle_imb(const DirectedNetwork& net, const SpreadEvaluator& eval, double budget);

/// Builds one RR collection under `weights` and runs oracle_imb on n F_R.
/// `params.budget` and `params.max_cost` are overwritten from the call.
SeedLottery oracle_imb_m(const DirectedNetwork& net, const WeightFunction& weights, double budget,
                         CeiParams params, Rng& rng, BuildLimits limits = {});

struct ChainPoint {
  double cost = 0.0;
  double spread = 0.0;
};

struct ChainDistribution {
  std::vector<double> probabilities;  ///< one per chain entry
  double value = 0.0;
  double expected_cost = 0.0;
};

/// Optimal distribution over all chain prefixes under an expected budget,
/// found by scanning every basic solution (single prefixes and every
/// budget-straddling pair, not only adjacent ones).
ChainDistribution full_chain_lp(std::span<const ChainPoint> chain, double budget);

struct BruteForceOptimum {
  double value = 0.0;
  std::vector<NodeId> lower;
  std::vector<NodeId> upper;
  double p = 1.0;
  double q = 0.0;
};

inline constexpr NodeId kBruteForceMaxNodes = 12;

/// Optimum of the LP over all seed-set distributions, by enumerating every
/// support of size at most two. Requires n <= 12 and m <= 20.
BruteForceOptimum brute_force_opt(const DirectedNetwork& net, const WeightFunction& weights, double budget);

/// Draws S_- with probability p and S_+ otherwise.
const std::vector<NodeId>& draw_seed(const SeedLottery& lottery, Rng& rng);

}  // namespace imb
