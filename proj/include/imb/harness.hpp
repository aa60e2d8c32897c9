#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "imb/diffusion.hpp"
#include "imb/learners.hpp"
#include "imb/network.hpp"
#include "imb/oracle.hpp"
#include "imb/rr_sets.hpp"

namespace imb {

struct ExperimentConfig {
  std::int64_t rounds = 1000;          // T
  double total_budget = 2000.0;        // B
  Eigen::Index dimension = 10;         // d
  std::vector<Algorithm> algorithms{Algorithm::co};
  std::int64_t warm_rounds = 200;
  NodeId warm_seed_size = 1;
  double v = 1.0;
  double bound_D = 1.0;
  double cei_l = 1.0;
  double cei_eps = 0.0;  // 0 selects 3/sqrt(n)
  bool enforce_eps_bound = true;
  std::uint64_t seed = 1;
  int replications = 3;

  // Instance. Empty paths fall back to the synthetic generator.
  std::string network_path;
  std::string cost_path;
  std::string embedding_path;
  NodeId synth_nodes = 25;
  ArcId synth_arcs = 319;
  double synth_embedding_low = 0.2;
  double synth_embedding_high = 1.0;
  TruthMode truth_mode = TruthMode::linear_planted;
  double truth_low = 0.01;
  double truth_high = 0.15;

  std::string out_path;

  /// Applies one key=value setting; throws std::invalid_argument on unknown
  /// keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
};

/// Reads "key = value" lines ('#' comments allowed) on top of `base`.
ExperimentConfig load_config(std::istream& in, ExperimentConfig base = {});

struct InstanceInputs {
  DirectedNetwork net;
  NodeEmbeddings embeddings;
};

/// Reads the configured network and embeddings, or draws them from the
/// master seed when no path is given.
InstanceInputs load_or_synthesize_inputs(const ExperimentConfig& config);

/// Network, edge features and ground truth shared by every replication.
struct ExperimentInstance {
  DirectedNetwork net;
  EdgeFeatureTable features;
  GroundTruth truth;
};

ExperimentInstance make_instance(const ExperimentConfig& config);

/// B / T rounded down far enough that adding b up T times never exceeds B.
double per_round_budget(double total_budget, std::int64_t rounds);

CeiParams cei_params(const ExperimentConfig& config, const DirectedNetwork& net, double budget);

/// Online weight estimator driving one replication.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual Algorithm algorithm() const = 0;
  /// Optimistic weight estimate u_t in [0, 1]^m for round t >= 1.
  virtual Eigen::VectorXd propose(std::int64_t t, Rng& rng) = 0;
  virtual void absorb(std::span<const Observation> observations) = 0;
};

std::unique_ptr<Learner> make_learner(Algorithm alg, const EdgeFeatureTable& features, double v, double bound_D);

/// Random seeding for `warm_rounds` rounds: each round picks `warm_seed_size`
/// distinct nodes uniformly, runs a cascade under the true weights and feeds
/// the observations to the learner. Nothing is charged against the budget.
void warm_start(const DirectedNetwork& net, const WeightFunction& truth, std::int64_t warm_rounds,
                NodeId warm_seed_size, Learner& learner, Rng& rng);

struct RoundResult {
  SeedLottery lottery;
  std::vector<NodeId> seeds;
  CascadeOutcome cascade;
};

/// One campaign round: estimate, seed with the RR-backed oracle at budget b,
/// cascade under the truth, feed back.
RoundResult run_round(const DirectedNetwork& net, const WeightFunction& truth, Learner& learner,
                      double budget, const CeiParams& cei, std::int64_t t, Rng& rng);

/// Reference for the regret proxy: the RR-backed oracle's lottery on the true
/// weights, valued on an RR collection built under those weights.
class ProxyReference {
 public:
  ProxyReference(const DirectedNetwork& net, const WeightFunction& truth, double budget, CeiParams cei, Rng& rng);

  double value() const { return value_; }
  const SeedLottery& lottery() const { return lottery_; }
  const RRCollection& collection() const { return collection_; }

  /// n F_R(S) on the reference collection; throws FingerprintMismatch unless
  /// `truth` is the weight function the collection was built under.
  double spread_estimate(std::span<const NodeId> seeds, const WeightFunction& truth) const;

 private:
  RRCollection collection_;
  SeedLottery lottery_;
  double value_ = 0.0;
};

/// Per-round proxy: reference value minus the spread estimate of S_t.
inline double proxy_regret(double reference_value, double spread_estimate) {
  return reference_value - spread_estimate;
}

struct RoundRecord {
  std::int64_t round = 0;
  double proxy = 0.0;
  double cum_proxy = 0.0;
  double expected_cost = 0.0;
  double realized_cost = 0.0;
  double realized_spread = 0.0;
};

struct RegretTrace {
  Algorithm algorithm = Algorithm::co;
  int replication = 0;
  std::uint64_t seed = 0;
  std::vector<RoundRecord> rounds;

  /// Sum of per-round lottery expected costs.
  long double total_expected_cost() const;
};

RegretTrace run_replication(const ExperimentInstance& instance, const ExperimentConfig& config,
                            const ProxyReference& reference, Algorithm alg, int replication);

struct ExperimentResult {
  double reference_value = 0.0;
  double per_round_budget = 0.0;
  std::vector<RegretTrace> traces;  // ordered by algorithm, then replication
};

/// Full experiment: one proxy reference, then every algorithm x replication.
/// Replications run concurrently on independent streams derived from the
/// master seed; output order does not depend on scheduling.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentInstance& instance);

/// Columns: replication,round,algorithm,proxy,cum_proxy,expected_cost,realized_cost,realized_spread
void write_trace_csv(std::ostream& out, const ExperimentResult& result);
/// Columns: round,algorithm,mean_cum_proxy,sd_cum_proxy,replications
void write_summary_csv(std::ostream& out, const ExperimentResult& result);

/// Mean cumulative proxy at the last round for one algorithm.
double final_mean_cum_proxy(const ExperimentResult& result, Algorithm alg);

}  // namespace imb
