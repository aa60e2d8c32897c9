#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "imb/harness.hpp"

using namespace imb;

namespace {

// Records what the round loop feeds it; proposes fixed weights.
class SpyLearner final : public Learner {
 public:
  explicit SpyLearner(ArcId m, double w = 0.0) : u_(Eigen::VectorXd::Constant(m, w)) {}
  Algorithm algorithm() const override { return Algorithm::cucb; }
  Eigen::VectorXd propose(std::int64_t t, Rng&) override {
    proposed.push_back(t);
    return u_;
  }
  void absorb(std::span<const Observation> obs) override {
    batches.emplace_back(obs.begin(), obs.end());
  }
  std::vector<std::int64_t> proposed;
  std::vector<std::vector<Observation>> batches;

 private:
  Eigen::VectorXd u_;
};

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.rounds = 40;
  c.total_budget = 80;
  c.dimension = 4;
  c.warm_rounds = 10;
  c.synth_nodes = 10;
  c.synth_arcs = 30;
  c.replications = 2;
  c.algorithms = {Algorithm::co, Algorithm::lin_ts, Algorithm::lin_ucb, Algorithm::cucb};
  c.v = 0.1;
  c.cei_eps = 0.9;
  c.seed = 3;
  return c;
}

std::string trace_csv(const ExperimentResult& r) {
  std::ostringstream out;
  write_trace_csv(out, r);
  return out.str();
}

}  // namespace

TEST_CASE("config file parsing") {
  std::istringstream in(
      "# desk run\n"
      "T = 1000\n"
      "B=2000   # total\n"
      "\n"
      "alg = co, lin-ts ,cucb\n"
      "v = 0.05\n"
      "eps_override = true\n"
      "truth = uniform-random\n");
  const auto c = load_config(in);
  CHECK(c.rounds == 1000);
  CHECK(c.total_budget == 2000.0);
  CHECK(c.algorithms == std::vector<Algorithm>{Algorithm::co, Algorithm::lin_ts, Algorithm::cucb});
  CHECK(c.v == 0.05);
  CHECK_FALSE(c.enforce_eps_bound);
  CHECK(c.truth_mode == TruthMode::uniform_random);
  CHECK(c.dimension == 10);  // default kept

  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream s(text);
    try {
      load_config(s);
    } catch (const LoadError& err) {
      return err.line();
    }
    return 0;
  };
  CHECK(line_of("T = 5\nbogus = 1\n") == 2);
  CHECK(line_of("T = five\n") == 1);
  CHECK(line_of("T 5\n") == 1);
  CHECK(line_of("alg = co,greedy\n") == 1);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  c.rounds = 0;
  CHECK_THROWS(c.validate());
  c = {};
  c.total_budget = 0;
  CHECK_THROWS(c.validate());
  c = {};
  c.warm_rounds = -1;
  CHECK_THROWS(c.validate());
  c = {};
  c.v = 0;
  CHECK_THROWS(c.validate());  // co needs v > 0
  c.algorithms = {Algorithm::lin_ts};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("per-round budget") {
  CHECK(per_round_budget(10000, 5000) == 2.0);
  CHECK(per_round_budget(2000, 1000) == 2.0);
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double B = 1 + 1000 * rng.uniform();
    const auto T = static_cast<std::int64_t>(1 + rng.index(7000));
    const double b = per_round_budget(B, T);
    long double total = 0;
    for (std::int64_t t = 0; t < T; ++t) total += b;
    CHECK(total <= B);
    CHECK(b > 0.0);
    CHECK(b >= B / T * (1 - 1e-12));
  }
}

TEST_CASE("warm start") {
  Rng g(2);
  const auto net = random_network(8, 20, g);
  const auto truth = WeightFunction::constant(20, 0.5);
  SUBCASE("zero rounds leave the learner untouched") {
    SpyLearner spy(20);
    Rng rng(1);
    warm_start(net, truth, 0, 1, spy, rng);
    CHECK(spy.batches.empty());
  }
  SUBCASE("one batch per warm round, nothing proposed") {
    SpyLearner spy(20);
    Rng rng(1);
    warm_start(net, truth, 25, 3, spy, rng);
    CHECK(spy.batches.size() == 25);
    CHECK(spy.proposed.empty());
  }
  SUBCASE("seed size larger than n") {
    SpyLearner spy(20);
    Rng rng(1);
    CHECK_THROWS(warm_start(net, truth, 1, 9, spy, rng));
  }
  SUBCASE("fixed seed gives the same post-warm state") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 20).cwiseAbs();
    const EdgeFeatureTable f(x);
    auto a = make_learner(Algorithm::lin_ucb, f, 1.0, 1.0);
    auto b = make_learner(Algorithm::lin_ucb, f, 1.0, 1.0);
    Rng ra(9), rb(9), pa(1), pb(1);
    warm_start(net, truth, 30, 2, *a, ra);
    warm_start(net, truth, 30, 2, *b, rb);
    CHECK(a->propose(4, pa) == b->propose(4, pb));
  }
}

TEST_CASE("round loop") {
  Rng g(3);
  const auto net = random_network(9, 25, g);
  const auto truth = WeightFunction::constant(25, 0.2);
  CeiParams cei;
  cei.eps = 1.0;
  SUBCASE("expected cost within budget; feedback reaches the learner") {
    SpyLearner spy(25, 0.3);
    Rng rng(4);
    for (std::int64_t t = 1; t <= 20; ++t) {
      const auto r = run_round(net, truth, spy, 2.5, cei, t, rng);
      CHECK(r.lottery.expected_cost() <= 2.5);
      CHECK(spy.batches.back().size() == r.cascade.observations.size());
    }
    CHECK(spy.proposed.size() == 20);
  }
  SUBCASE("all-zero estimates still give a feasible lottery") {
    SpyLearner spy(25, 0.0);
    Rng rng(4);
    const auto r = run_round(net, truth, spy, 2.5, cei, 1, rng);
    CHECK_FALSE(r.lottery.support.empty());
    CHECK(r.lottery.expected_cost() <= 2.5);
  }
}

TEST_CASE("proxy regret") {
  CHECK(proxy_regret(2.5, 2.0) == 0.5);
  CHECK(proxy_regret(2.0, 2.5) == -0.5);

  Rng g(5);
  const auto net = random_network(10, 30, g);
  const auto truth = WeightFunction::constant(30, 0.15);
  CeiParams cei;
  cei.eps = 0.9;
  Rng rng(6);
  const ProxyReference ref(net, truth, 2.0, cei, rng);
  CHECK(ref.value() == doctest::Approx(ref.lottery().expected_spread()));
  CHECK_THROWS_AS(ref.spread_estimate(ref.lottery().support[0].seeds, WeightFunction::constant(30, 0.1)),
                  FingerprintMismatch);

  // S_t drawn from the reference lottery: mean proxy ~ 0.
  const int draws = 4000;
  double sum = 0, sq = 0;
  for (int i = 0; i < draws; ++i) {
    const double p = proxy_regret(ref.value(), ref.spread_estimate(draw_seed(ref.lottery(), rng), truth));
    sum += p;
    sq += p * p;
  }
  const double mean = sum / draws;
  const double se = std::sqrt(std::max(0.0, sq / draws - mean * mean) / draws);
  CHECK(std::abs(mean) <= 4 * se + 1e-12);
}

TEST_CASE("experiment traces") {
  const auto config = small_config();
  const auto result = run_experiment(config);
  CHECK(result.per_round_budget == 2.0);
  REQUIRE(result.traces.size() == 8);
  for (const auto& tr : result.traces) {
    REQUIRE(tr.rounds.size() == 40);
    double cum = 0.0;
    for (std::size_t i = 0; i < tr.rounds.size(); ++i) {
      const auto& r = tr.rounds[i];
      CHECK(r.round == static_cast<std::int64_t>(i + 1));
      cum += r.proxy;
      CHECK(r.cum_proxy == cum);  // exact prefix sums
      CHECK(r.expected_cost <= result.per_round_budget);
      CHECK(r.realized_spread >= 1.0);
    }
    CHECK(tr.total_expected_cost() <= config.total_budget);
  }
  // Ordered by algorithm, then replication.
  CHECK(result.traces[0].algorithm == Algorithm::co);
  CHECK(result.traces[1].replication == 1);
  CHECK(result.traces[7].algorithm == Algorithm::cucb);
}

TEST_CASE("the reference does not depend on the algorithm list") {
  auto a = small_config();
  a.rounds = 5;
  auto b = a;
  b.algorithms = {Algorithm::cucb};
  CHECK(run_experiment(a).reference_value == run_experiment(b).reference_value);
}

TEST_CASE("same master seed, same bytes") {
  auto config = small_config();
  config.rounds = 15;
  const auto x = trace_csv(run_experiment(config));
  const auto y = trace_csv(run_experiment(config));
  CHECK(x == y);
  CHECK(x.rfind("replication,round,algorithm,proxy,cum_proxy,expected_cost,realized_cost,realized_spread\n", 0) == 0);
  const auto rows = std::count(x.begin(), x.end(), '\n');
  CHECK(rows == 1 + 15 * 2 * 4);
  config.seed = 4;
  CHECK(trace_csv(run_experiment(config)) != x);
}

TEST_CASE("summary CSV") {
  auto config = small_config();
  config.rounds = 6;
  config.replications = 3;
  config.algorithms = {Algorithm::lin_ts};
  const auto result = run_experiment(config);
  std::ostringstream out;
  write_summary_csv(out, result);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "round,algorithm,mean_cum_proxy,sd_cum_proxy,replications");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  double mean = 0;
  for (const auto& tr : result.traces) mean += tr.rounds.back().cum_proxy / 3.0;
  CHECK(final_mean_cum_proxy(result, Algorithm::lin_ts) == doctest::Approx(mean));
  CHECK_THROWS(final_mean_cum_proxy(result, Algorithm::co));
}

TEST_CASE("instance files reproduce the synthetic instance") {
  auto config = small_config();
  const auto inputs = load_or_synthesize_inputs(config);
  const auto dir = std::filesystem::temp_directory_path() / "imb_harness_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream e(dir / "g.edges"), m(dir / "g.emb");
    write_edge_list(e, inputs.net);
    write_node_embeddings(m, inputs.embeddings);
  }
  auto from_files = config;
  from_files.network_path = (dir / "g.edges").string();
  from_files.embedding_path = (dir / "g.emb").string();
  const auto a = make_instance(config);
  const auto b = make_instance(from_files);
  CHECK(a.features.matrix() == b.features.matrix());
  CHECK(a.truth.weights.fingerprint() == b.truth.weights.fingerprint());
  std::filesystem::remove_all(dir);

  from_files.dimension = 5;
  from_files.network_path.clear();
  from_files.embedding_path.clear();
  auto mismatched = from_files;
  mismatched.embedding_path = (dir / "missing.emb").string();
  CHECK_THROWS(make_instance(mismatched));
}
