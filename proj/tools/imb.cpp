// imb: command-line front end for the budgeted influence-maximization bandit
// library.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imb/diffusion.hpp"
#include "imb/harness.hpp"
#include "imb/learners.hpp"
#include "imb/network.hpp"
#include "imb/oracle.hpp"
#include "imb/rng.hpp"
#include "imb/rr_sets.hpp"

namespace {

struct GraphArgs {
  std::string network;
  std::string costs;
  std::string weights;
  std::optional<double> constant_weight;
  std::vector<imb::NodeId> seeds;
};

void add_graph_options(CLI::App* cmd, GraphArgs& g, bool with_seeds) {
  cmd->add_option("--network", g.network, "edge list: one 'u v' per line")->required()->check(CLI::ExistingFile);
  cmd->add_option("--costs", g.costs, "node costs: one 'v c' per line")->check(CLI::ExistingFile);
  auto* w = cmd->add_option("--weights", g.weights, "arc weights: 'u v w' per line")->check(CLI::ExistingFile);
  auto* c = cmd->add_option("--weight", g.constant_weight, "same weight on every arc");
  w->excludes(c);
  if (with_seeds) cmd->add_option("--seeds", g.seeds, "seed node ids")->delimiter(',')->required();
}

imb::DirectedNetwork read_network(const GraphArgs& g) {
  std::optional<std::filesystem::path> costs;
  if (!g.costs.empty()) costs = g.costs;
  return imb::load_network_file(g.network, costs);
}

imb::WeightFunction read_weights(const GraphArgs& g, const imb::DirectedNetwork& net) {
  if (g.constant_weight) return imb::WeightFunction::constant(net.arc_count(), *g.constant_weight);
  if (g.weights.empty()) throw CLI::ValidationError("one of --weights or --weight is required");
  std::ifstream in(g.weights);
  if (!in) throw std::runtime_error("cannot open " + g.weights);
  return imb::load_weights(in, net);
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string join(const std::vector<imb::NodeId>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

imb::CeiParams rr_params(const imb::DirectedNetwork& net, double l, double eps, bool override_bound,
                         double budget) {
  imb::CeiParams p;
  p.l = l;
  p.eps = eps > 0.0 ? eps : imb::max_cei_eps(net.node_count());
  p.enforce_eps_bound = !override_bound;
  p.budget = budget;
  p.max_cost = net.max_cost();
  return p;
}

void print_lottery(const imb::SeedLottery& lottery) {
  std::cout << "probability,cost,spread,seeds\n";
  for (const auto& o : lottery.support) {
    std::cout << fmt(o.probability) << ',' << fmt(o.cost) << ',' << fmt(o.spread) << ",\"" << join(o.seeds)
              << "\"\n";
  }
  std::cout << "# expected_cost " << fmt(lottery.expected_cost()) << "\n# expected_spread "
            << fmt(lottery.expected_spread()) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted influence maximization with linear edge-weight bandits"};
  app.require_subcommand(1);

  // simulate
  GraphArgs sim;
  std::uint64_t sim_seed = 1;
  auto* simulate = app.add_subcommand("simulate", "run one independent cascade");
  add_graph_options(simulate, sim, true);
  simulate->add_option("--seed", sim_seed, "rng seed");

  // spread
  GraphArgs spr;
  std::string spr_method = "mc";
  std::size_t spr_sims = 10000;
  std::uint64_t spr_seed = 1;
  double spr_l = 1.0, spr_eps = 0.0, spr_budget = 1.0;
  bool spr_override = false;
  auto* spread = app.add_subcommand("spread", "estimate the expected spread of a seed set");
  add_graph_options(spread, spr, true);
  spread->add_option("--method", spr_method, "exact | mc | rr")->check(CLI::IsMember({"exact", "mc", "rr"}));
  spread->add_option("--sims", spr_sims, "monte carlo simulations");
  spread->add_option("--seed", spr_seed, "rng seed");
  spread->add_option("--l", spr_l, "RR confidence exponent");
  spread->add_option("--eps", spr_eps, "RR accuracy (default 3/sqrt(n))");
  spread->add_flag("--eps-override", spr_override, "allow eps above 3/sqrt(n)");
  spread->add_option("--budget", spr_budget, "budget used to size the RR collection");

  // oracle
  GraphArgs ora;
  std::string ora_method = "rr";
  double ora_budget = 1.0, ora_l = 1.0, ora_eps = 0.0;
  bool ora_override = false;
  std::size_t ora_sims = 10000;
  std::uint64_t ora_seed = 1;
  auto* oracle = app.add_subcommand("oracle", "print the seed lottery for given weights and budget");
  add_graph_options(oracle, ora, false);
  oracle->add_option("--budget", ora_budget, "per-round budget b")->required();
  oracle->add_option("--method", ora_method, "exact | mc | rr")->check(CLI::IsMember({"exact", "mc", "rr"}));
  oracle->add_option("--sims", ora_sims, "monte carlo simulations per evaluation");
  oracle->add_option("--seed", ora_seed, "rng seed");
  oracle->add_option("--l", ora_l, "RR confidence exponent");
  oracle->add_option("--eps", ora_eps, "RR accuracy (default 3/sqrt(n))");
  oracle->add_flag("--eps-override", ora_override, "allow eps above 3/sqrt(n)");

  // run
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::string summary_path;
  auto* run = app.add_subcommand("run", "full experiment; writes the trace CSV");
  run->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  for (const char* key : {"T", "B", "d", "alg", "warm", "v", "D", "eps", "l", "seed", "reps", "out"}) {
    run->add_option_function<std::string>(
        std::string("--") + key, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
        std::string("override config key ") + key);
  }
  run->add_option("--summary", summary_path, "summary CSV path (default: <out>.summary.csv)");

  // synth
  std::vector<std::pair<std::string, std::string>> synth_keys;
  std::string synth_net, synth_emb, synth_weights;
  auto* synth = app.add_subcommand("synth", "write the synthetic network, embeddings and true weights");
  for (const char* key : {"nodes", "arcs", "d", "seed", "truth", "truth_low", "truth_high"}) {
    synth->add_option_function<std::string>(
        std::string("--") + key, [&synth_keys, key](const std::string& v) { synth_keys.emplace_back(key, v); },
        std::string("config key ") + key);
  }
  synth->add_option("--network-out", synth_net, "edge list path")->required();
  synth->add_option("--embeddings-out", synth_emb, "node embedding path")->required();
  synth->add_option("--weights-out", synth_weights, "true arc weights path");

  // bound
  double bn = 0, bm = 0, bd = 0, bT = 0, bv = 1.0, bD = 1.0, beta = 1.0 - 1.0 / std::exp(1.0);
  auto* bound = app.add_subcommand("bound", "evaluate the T-round regret bound constant");
  bound->add_option("--n", bn, "nodes")->required();
  bound->add_option("--m", bm, "arcs")->required();
  bound->add_option("--d", bd, "feature dimension")->required();
  bound->add_option("--T", bT, "rounds")->required();
  bound->add_option("--v", bv, "sampling scale");
  bound->add_option("--D", bD, "norm bound on theta");
  bound->add_option("--eta", beta, "oracle scaling");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const auto net = read_network(sim);
      const auto w = read_weights(sim, net);
      imb::Rng rng(sim_seed);
      const auto out = imb::simulate_cascade(net, w, sim.seeds, rng);
      std::cout << "activated " << out.activated.size() << '\n';
      std::cout << "nodes " << join(out.activated) << '\n';
      std::cout << "arc,head,tail,success\n";
      for (const auto& o : out.observations) {
        const auto& a = net.arc(o.arc);
        std::cout << o.arc << ',' << a.head << ',' << a.tail << ',' << (o.success ? 1 : 0) << '\n';
      }
    } else if (spread->parsed()) {
      const auto net = read_network(spr);
      const auto w = read_weights(spr, net);
      if (spr_method == "exact") {
        std::cout << fmt(imb::exact_spread(net, w, spr.seeds)) << '\n';
      } else if (spr_method == "mc") {
        imb::Rng rng(spr_seed);
        const auto est = imb::monte_carlo_spread(net, w, spr.seeds, spr_sims, rng);
        std::cout << fmt(est.mean) << " +- " << fmt(est.std_error) << '\n';
      } else {
        imb::Rng rng(spr_seed);
        const auto coll = imb::build_collection(net, w, rr_params(net, spr_l, spr_eps, spr_override, spr_budget), rng);
        std::cout << fmt(coll.estimate_spread(spr.seeds)) << " (" << coll.size() << " RR sets)\n";
      }
    } else if (oracle->parsed()) {
      const auto net = read_network(ora);
      const auto w = read_weights(ora, net);
      if (ora_method == "rr") {
        imb::Rng rng(ora_seed);
        print_lottery(imb::oracle_imb_m(net, w, ora_budget, rr_params(net, ora_l, ora_eps, ora_override, ora_budget), rng));
      } else if (ora_method == "exact") {
        print_lottery(imb::oracle_imb(net, imb::SpreadEvaluator::exact(net, w), ora_budget));
      } else {
        print_lottery(imb::oracle_imb(net, imb::SpreadEvaluator::monte_carlo(net, w, ora_sims, ora_seed), ora_budget));
      }
    } else if (run->parsed()) {
      imb::ExperimentConfig config;
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        config = imb::load_config(in);
      }
      for (const auto& [k, v] : overrides) config.set(k, v);
      config.validate();
      const auto result = imb::run_experiment(config);
      if (config.out_path.empty()) {
        imb::write_trace_csv(std::cout, result);
      } else {
        std::ofstream out(config.out_path);
        if (!out) throw std::runtime_error("cannot write " + config.out_path);
        imb::write_trace_csv(out, result);
        if (summary_path.empty()) summary_path = config.out_path + ".summary.csv";
      }
      if (!summary_path.empty()) {
        std::ofstream out(summary_path);
        if (!out) throw std::runtime_error("cannot write " + summary_path);
        imb::write_summary_csv(out, result);
      }
      std::cerr << "reference " << fmt(result.reference_value) << ", b = " << fmt(result.per_round_budget) << '\n';
      for (imb::Algorithm alg : config.algorithms) {
        std::cerr << imb::algorithm_name(alg) << " final mean cum proxy "
                  << fmt(imb::final_mean_cum_proxy(result, alg)) << '\n';
      }
    } else if (synth->parsed()) {
      imb::ExperimentConfig config;
      for (const auto& [k, v] : synth_keys) config.set(k, v);
      const auto inputs = imb::load_or_synthesize_inputs(config);
      auto open = [](const std::string& path) {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        return out;
      };
      {
        auto out = open(synth_net);
        imb::write_edge_list(out, inputs.net);
      }
      {
        auto out = open(synth_emb);
        imb::write_node_embeddings(out, inputs.embeddings);
      }
      if (!synth_weights.empty()) {
        const auto inst = imb::make_instance(config);
        auto out = open(synth_weights);
        imb::write_weights(out, inst.net, inst.truth.weights);
      }
    } else if (bound->parsed()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", imb::regret_bound_constant(bn, bm, bd, bT, bv, bD, beta));
      std::cout << buf << '\n';
    }
  } catch (const std::exception& err) {
    std::cerr << "imb: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
