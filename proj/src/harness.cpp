#include "imb/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace imb {

namespace {

// Stream ids under the master seed.
enum : std::uint64_t {
  kNetworkStream = 0,
  kEmbeddingStream = 1,
  kTruthStream = 2,
  kReferenceStream = 3,
  kReplicationBase = 1000,
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  try {
    const double x = std::stod(value, &used);
    if (used == value.size()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config '" + key + "': not a number: '" + value + "'");
}

std::int64_t to_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  try {
    const long long x = std::stoll(value, &used);
    if (used == value.size()) return x;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config '" + key + "': not an integer: '" + value + "'");
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw std::invalid_argument("config '" + key + "': not a boolean: '" + value + "'");
}

}  // namespace

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "T" || key == "rounds") {
    rounds = to_int(key, value);
  } else if (key == "B" || key == "budget") {
    total_budget = to_real(key, value);
  } else if (key == "d" || key == "dimension") {
    dimension = static_cast<Eigen::Index>(to_int(key, value));
  } else if (key == "alg" || key == "algorithm") {
    algorithms.clear();
    std::stringstream list(value);
    for (std::string item; std::getline(list, item, ',');) algorithms.push_back(parse_algorithm(trim(item)));
  } else if (key == "warm" || key == "warm_rounds") {
    warm_rounds = to_int(key, value);
  } else if (key == "warm_seed_size") {
    warm_seed_size = static_cast<NodeId>(to_int(key, value));
  } else if (key == "v") {
    v = to_real(key, value);
  } else if (key == "D") {
    bound_D = to_real(key, value);
  } else if (key == "l") {
    cei_l = to_real(key, value);
  } else if (key == "eps") {
    cei_eps = to_real(key, value);
  } else if (key == "eps_override") {
    enforce_eps_bound = !to_bool(key, value);
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(to_int(key, value));
  } else if (key == "reps" || key == "replications") {
    replications = static_cast<int>(to_int(key, value));
  } else if (key == "network") {
    network_path = value;
  } else if (key == "costs") {
    cost_path = value;
  } else if (key == "embeddings") {
    embedding_path = value;
  } else if (key == "nodes") {
    synth_nodes = static_cast<NodeId>(to_int(key, value));
  } else if (key == "arcs") {
    synth_arcs = static_cast<ArcId>(to_int(key, value));
  } else if (key == "truth") {
    if (value == "linear-planted") {
      truth_mode = TruthMode::linear_planted;
    } else if (value == "uniform-random") {
      truth_mode = TruthMode::uniform_random;
    } else {
      throw std::invalid_argument("config 'truth': expected linear-planted or uniform-random");
    }
  } else if (key == "truth_low") {
    truth_low = to_real(key, value);
  } else if (key == "truth_high") {
    truth_high = to_real(key, value);
  } else if (key == "out") {
    out_path = value;
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::validate() const {
  if (rounds < 1) throw std::invalid_argument("T must be >= 1");
  if (!(total_budget > 0.0)) throw std::invalid_argument("B must be positive");
  if (dimension < 1) throw std::invalid_argument("d must be >= 1");
  if (algorithms.empty()) throw std::invalid_argument("no algorithm selected");
  if (warm_rounds < 0) throw std::invalid_argument("warm rounds must be >= 0");
  if (warm_seed_size < 0) throw std::invalid_argument("warm seed size must be >= 0");
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (!(v >= 0.0) || !(bound_D >= 0.0)) throw std::invalid_argument("v and D must be nonnegative");
  if (std::find(algorithms.begin(), algorithms.end(), Algorithm::co) != algorithms.end() &&
      !(v > 0.0 && bound_D > 0.0)) {
    throw std::invalid_argument("co needs v > 0 and D > 0");
  }
}

ExperimentConfig load_config(std::istream& in, ExperimentConfig base) {
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw LoadError(lineno, "expected key=value");
    try {
      base.set(trim(body.substr(0, eq)), body.substr(eq + 1));
    } catch (const std::invalid_argument& err) {
      throw LoadError(lineno, err.what());
    }
  }
  return base;
}

InstanceInputs load_or_synthesize_inputs(const ExperimentConfig& config) {
  InstanceInputs in;
  if (config.network_path.empty()) {
    Rng rng = Rng::derive(config.seed, kNetworkStream);
    in.net = random_network(config.synth_nodes, config.synth_arcs, rng);
  } else {
    std::optional<std::filesystem::path> costs;
    if (!config.cost_path.empty()) costs = config.cost_path;
    in.net = load_network_file(config.network_path, costs);
  }
  if (config.embedding_path.empty()) {
    Rng rng = Rng::derive(config.seed, kEmbeddingStream);
    in.embeddings = random_embeddings(in.net.node_count(), config.dimension, config.synth_embedding_low,
                                      config.synth_embedding_high, rng);
  } else {
    std::ifstream file(config.embedding_path);
    if (!file) throw LoadError(0, "cannot open " + config.embedding_path);
    in.embeddings = load_node_embeddings(file);
  }
  return in;
}

ExperimentInstance make_instance(const ExperimentConfig& config) {
  InstanceInputs inputs = load_or_synthesize_inputs(config);
  ExperimentInstance inst;
  inst.net = std::move(inputs.net);
  inst.features = edge_features_from_node_embeddings(inputs.embeddings, inst.net);
  if (inst.features.dimension() != config.dimension) {
    throw std::invalid_argument("embedding dimension " + std::to_string(inst.features.dimension()) +
                                " does not match d = " + std::to_string(config.dimension));
  }

  Rng rng = Rng::derive(config.seed, kTruthStream);
  GroundTruthSpec spec;
  spec.mode = config.truth_mode;
  spec.low = config.truth_low;
  spec.high = config.truth_high;
  inst.truth = synth_ground_truth(inst.net, spec, &inst.features, rng);
  return inst;
}

namespace {

// Accumulated the same way as RegretTrace::total_expected_cost. Rounding is
// monotone, so any per-round costs <= b also sum to <= this.
long double running_total(double b, std::int64_t rounds) {
  long double total = 0.0L;
  for (std::int64_t t = 0; t < rounds; ++t) total += b;
  return total;
}

}  // namespace

double per_round_budget(double total_budget, std::int64_t rounds) {
  if (rounds < 1) throw std::invalid_argument("T must be >= 1");
  double b = total_budget / static_cast<double>(rounds);
  while (running_total(b, rounds) > static_cast<long double>(total_budget)) b = std::nextafter(b, 0.0);
  return b;
}

CeiParams cei_params(const ExperimentConfig& config, const DirectedNetwork& net, double budget) {
  CeiParams p;
  p.l = config.cei_l;
  p.eps = config.cei_eps > 0.0 ? config.cei_eps : max_cei_eps(net.node_count());
  p.enforce_eps_bound = config.enforce_eps_bound;
  p.budget = budget;
  p.max_cost = net.max_cost();
  return p;
}

namespace {

class CoLearner final : public Learner {
 public:
  CoLearner(const EdgeFeatureTable& f, double v, double D)
      : features_(f.matrix()), co_(f.dimension(), f.arc_count(), v, D) {}
  Algorithm algorithm() const override { return Algorithm::co; }
  Eigen::VectorXd propose(std::int64_t t, Rng& rng) override { return co_.propose(features_, t, rng).u; }
  void absorb(std::span<const Observation> obs) override { ridge_update(co_.base(), features_, obs); }

 private:
  const Eigen::MatrixXd& features_;
  CumulativeOversampler<double> co_;
};

class TsLearner final : public Learner {
 public:
  TsLearner(const EdgeFeatureTable& f, double v, double D) : features_(f.matrix()), state_(f.dimension()), v_(v), D_(D) {}
  Algorithm algorithm() const override { return Algorithm::lin_ts; }
  Eigen::VectorXd propose(std::int64_t t, Rng& rng) override {
    return lin_ts_weights(state_, features_, t, v_, D_, rng);
  }
  void absorb(std::span<const Observation> obs) override { ridge_update(state_, features_, obs); }

 private:
  const Eigen::MatrixXd& features_;
  LeastSquaresState<double> state_;
  double v_, D_;
};

class UcbLearner final : public Learner {
 public:
  UcbLearner(const EdgeFeatureTable& f, double D) : features_(f.matrix()), state_(f.dimension()), D_(D) {}
  Algorithm algorithm() const override { return Algorithm::lin_ucb; }
  Eigen::VectorXd propose(std::int64_t t, Rng&) override { return lin_ucb_weights(state_, features_, t, D_); }
  void absorb(std::span<const Observation> obs) override { ridge_update(state_, features_, obs); }

 private:
  const Eigen::MatrixXd& features_;
  LeastSquaresState<double> state_;
  double D_;
};

class CucbLearner final : public Learner {
 public:
  explicit CucbLearner(ArcId m) : counter_(m) {}
  Algorithm algorithm() const override { return Algorithm::cucb; }
  Eigen::VectorXd propose(std::int64_t t, Rng&) override { return cucb_weights(counter_, t); }
  void absorb(std::span<const Observation> obs) override { counter_.update(obs); }

 private:
  EdgeCounter counter_;
};

}  // namespace

std::unique_ptr<Learner> make_learner(Algorithm alg, const EdgeFeatureTable& features, double v, double bound_D) {
  switch (alg) {
    case Algorithm::co: return std::make_unique<CoLearner>(features, v, bound_D);
    case Algorithm::lin_ts: return std::make_unique<TsLearner>(features, v, bound_D);
    case Algorithm::lin_ucb: return std::make_unique<UcbLearner>(features, bound_D);
    case Algorithm::cucb: return std::make_unique<CucbLearner>(features.arc_count());
  }
  throw std::invalid_argument("unknown algorithm");
}

void warm_start(const DirectedNetwork& net, const WeightFunction& truth, std::int64_t warm_rounds,
                NodeId warm_seed_size, Learner& learner, Rng& rng) {
  if (warm_rounds < 0) throw std::invalid_argument("warm rounds must be >= 0");
  if (warm_seed_size < 0 || warm_seed_size > net.node_count()) {
    throw std::invalid_argument("warm seed size exceeds the node count");
  }
  std::vector<NodeId> pool(static_cast<std::size_t>(net.node_count()));
  for (std::int64_t r = 0; r < warm_rounds; ++r) {
    for (NodeId v = 0; v < net.node_count(); ++v) pool[static_cast<std::size_t>(v)] = v;
    // Partial Fisher-Yates: the first warm_seed_size entries form the sample.
    for (NodeId i = 0; i < warm_seed_size; ++i) {
      const auto j = i + static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(net.node_count() - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    const std::span<const NodeId> seeds(pool.data(), static_cast<std::size_t>(warm_seed_size));
    learner.absorb(simulate_cascade(net, truth, seeds, rng).observations);
  }
}

RoundResult run_round(const DirectedNetwork& net, const WeightFunction& truth, Learner& learner,
                      double budget, const CeiParams& cei, std::int64_t t, Rng& rng) {
  const Eigen::VectorXd u = learner.propose(t, rng);
  const WeightFunction estimate(std::vector<double>(u.data(), u.data() + u.size()));
  RoundResult out;
  out.lottery = oracle_imb_m(net, estimate, budget, cei, rng);
  out.seeds = draw_seed(out.lottery, rng);
  out.cascade = simulate_cascade(net, truth, out.seeds, rng);
  learner.absorb(out.cascade.observations);
  return out;
}

ProxyReference::ProxyReference(const DirectedNetwork& net, const WeightFunction& truth, double budget,
                               CeiParams cei, Rng& rng) {
  cei.budget = budget;
  cei.max_cost = net.max_cost();
  collection_ = build_collection(net, truth, cei, rng);
  lottery_ = oracle_imb(net, SpreadEvaluator::rr_collection(collection_, truth), budget);
  value_ = lottery_.expected_spread();
}

double ProxyReference::spread_estimate(std::span<const NodeId> seeds, const WeightFunction& truth) const {
  collection_.require_weights(truth);
  return collection_.estimate_spread(seeds);
}

long double RegretTrace::total_expected_cost() const {
  long double total = 0.0L;
  for (const auto& r : rounds) total += r.expected_cost;
  return total;
}

RegretTrace run_replication(const ExperimentInstance& instance, const ExperimentConfig& config,
                            const ProxyReference& reference, Algorithm alg, int replication) {
  const double b = per_round_budget(config.total_budget, config.rounds);
  const CeiParams cei = cei_params(config, instance.net, b);
  const WeightFunction& truth = instance.truth.weights;

  RegretTrace trace;
  trace.algorithm = alg;
  trace.replication = replication;
  trace.seed = Rng::mix(config.seed, kReplicationBase + static_cast<std::uint64_t>(replication));
  Rng warm_rng = Rng::derive(trace.seed, 0);
  Rng round_rng = Rng::derive(trace.seed, 1);

  auto learner = make_learner(alg, instance.features, config.v, config.bound_D);
  warm_start(instance.net, truth, config.warm_rounds, config.warm_seed_size, *learner, warm_rng);

  trace.rounds.reserve(static_cast<std::size_t>(config.rounds));
  double cumulative = 0.0;
  for (std::int64_t t = 1; t <= config.rounds; ++t) {
    const RoundResult r = run_round(instance.net, truth, *learner, b, cei, t, round_rng);
    RoundRecord rec;
    rec.round = t;
    rec.proxy = proxy_regret(reference.value(), reference.spread_estimate(r.seeds, truth));
    cumulative += rec.proxy;
    rec.cum_proxy = cumulative;
    rec.expected_cost = r.lottery.expected_cost();
    rec.realized_cost = instance.net.cost_of(r.seeds);
    rec.realized_spread = static_cast<double>(r.cascade.activated.size());
    trace.rounds.push_back(rec);
  }
  return trace;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  return run_experiment(config, make_instance(config));
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentInstance& instance) {
  config.validate();
  ExperimentResult result;
  result.per_round_budget = per_round_budget(config.total_budget, config.rounds);
  Rng ref_rng = Rng::derive(config.seed, kReferenceStream);
  const ProxyReference reference(instance.net, instance.truth.weights, result.per_round_budget,
                                 cei_params(config, instance.net, result.per_round_budget), ref_rng);
  result.reference_value = reference.value();

  std::vector<std::future<RegretTrace>> jobs;
  for (Algorithm alg : config.algorithms) {
    for (int rep = 0; rep < config.replications; ++rep) {
      jobs.push_back(std::async(std::launch::async, [&, alg, rep] {
        return run_replication(instance, config, reference, alg, rep);
      }));
    }
  }
  for (auto& job : jobs) result.traces.push_back(job.get());
  return result;
}

namespace {

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

void write_trace_csv(std::ostream& out, const ExperimentResult& result) {
  out << "replication,round,algorithm,proxy,cum_proxy,expected_cost,realized_cost,realized_spread\n";
  for (const RegretTrace& tr : result.traces) {
    for (const RoundRecord& r : tr.rounds) {
      out << tr.replication << ',' << r.round << ',' << algorithm_name(tr.algorithm) << ',' << fmt_real(r.proxy)
          << ',' << fmt_real(r.cum_proxy) << ',' << fmt_real(r.expected_cost) << ',' << fmt_real(r.realized_cost)
          << ',' << fmt_real(r.realized_spread) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const ExperimentResult& result) {
  out << "round,algorithm,mean_cum_proxy,sd_cum_proxy,replications\n";
  std::vector<Algorithm> order;
  for (const auto& tr : result.traces) {
    if (std::find(order.begin(), order.end(), tr.algorithm) == order.end()) order.push_back(tr.algorithm);
  }
  for (Algorithm alg : order) {
    std::vector<const RegretTrace*> group;
    for (const auto& tr : result.traces) {
      if (tr.algorithm == alg) group.push_back(&tr);
    }
    const std::size_t rounds = group.front()->rounds.size();
    for (std::size_t i = 0; i < rounds; ++i) {
      double mean = 0.0;
      for (const auto* tr : group) mean += tr->rounds[i].cum_proxy;
      mean /= static_cast<double>(group.size());
      double ss = 0.0;
      for (const auto* tr : group) ss += (tr->rounds[i].cum_proxy - mean) * (tr->rounds[i].cum_proxy - mean);
      const double sd = group.size() > 1 ? std::sqrt(ss / static_cast<double>(group.size() - 1)) : 0.0;
      out << group.front()->rounds[i].round << ',' << algorithm_name(alg) << ',' << fmt_real(mean) << ','
          << fmt_real(sd) << ',' << group.size() << '\n';
    }
  }
}

double final_mean_cum_proxy(const ExperimentResult& result, Algorithm alg) {
  double total = 0.0;
  int count = 0;
  for (const auto& tr : result.traces) {
    if (tr.algorithm != alg || tr.rounds.empty()) continue;
    total += tr.rounds.back().cum_proxy;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("no traces for algorithm " + std::string(algorithm_name(alg)));
  return total / count;
}

}  // namespace imb
