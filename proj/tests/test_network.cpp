#include <doctest.h>

#include <sstream>

#include "imb/network.hpp"

using namespace imb;

namespace {

DirectedNetwork from_text(const std::string& edges) {
  std::istringstream in(edges);
  return load_network(in);
}

EdgeFeatureTable features_of(std::initializer_list<std::initializer_list<double>> cols) {
  const auto d = static_cast<Eigen::Index>(cols.begin()->size());
  Eigen::MatrixXd m(d, static_cast<Eigen::Index>(cols.size()));
  Eigen::Index j = 0;
  for (const auto& c : cols) {
    Eigen::Index i = 0;
    for (double x : c) m(i++, j) = x;
    ++j;
  }
  return EdgeFeatureTable(m);
}

}  // namespace

TEST_CASE("load_network assigns arc ids in file order") {
  const auto net = from_text("0 1\n0 2\n");
  CHECK(net.node_count() == 3);
  CHECK(net.arc_count() == 2);
  REQUIRE(net.out_arcs(0).size() == 2);
  CHECK(net.out_arcs(0)[0] == 0);
  CHECK(net.out_arcs(0)[1] == 1);
  CHECK(net.in_arcs(2).size() == 1);
  CHECK(net.arc(1) == Arc{0, 2});
  CHECK(net.cost(2) == 1.0);
}

TEST_CASE("comments and blank lines are skipped") {
  const auto net = from_text("# FromNodeId ToNodeId\n\n3 1\n  \n1 0\n");
  CHECK(net.node_count() == 4);
  CHECK(net.arc_count() == 2);
}

TEST_CASE("load errors name the line") {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      from_text(text);
    } catch (const LoadError& err) {
      return err.line();
    }
    return 0;
  };
  CHECK(line_of("0 1\n0 0\n") == 2);        // self-loop
  CHECK(line_of("0 1\n1 2\n0 1\n") == 3);   // duplicate
  CHECK(line_of("0 1\n1 x\n") == 2);        // malformed
  CHECK(line_of("0 1 2\n") == 1);           // trailing token
  CHECK(line_of("-1 2\n") == 1);

  try {
    from_text("0 1\n0 0\n");
  } catch (const LoadError& err) {
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("cost file") {
  std::istringstream edges("0 1\n1 2\n");
  SUBCASE("covers every node") {
    std::istringstream costs("0 1.5\n1 2\n2 0.25\n");
    const auto net = load_network(edges, &costs);
    CHECK(net.cost(0) == 1.5);
    CHECK(net.total_cost() == doctest::Approx(3.75));
    CHECK(net.max_cost() == 2.0);
    const std::vector<NodeId> s{0, 2};
    CHECK(net.cost_of(s) == doctest::Approx(1.75));
  }
  SUBCASE("nonpositive cost is rejected with its line") {
    std::istringstream costs("0 1\n1 0\n2 1\n");
    try {
      load_network(edges, &costs);
      FAIL("expected LoadError");
    } catch (const LoadError& err) {
      CHECK(err.line() == 2);
    }
  }
  SUBCASE("missing node") {
    std::istringstream costs("0 1\n1 1\n");
    CHECK_THROWS_AS(load_network(edges, &costs), LoadError);
  }
}

TEST_CASE("constructor invariants") {
  CHECK_THROWS(DirectedNetwork(2, {{0, 2}}, {1, 1}));
  CHECK_THROWS(DirectedNetwork(2, {{1, 1}}, {1, 1}));
  CHECK_THROWS(DirectedNetwork(2, {{0, 1}, {0, 1}}, {1, 1}));
  CHECK_THROWS(DirectedNetwork(2, {{0, 1}}, {1, -1}));
  CHECK_THROWS(DirectedNetwork(2, {{0, 1}}, {1}));
}

TEST_CASE("every arc sits in exactly one out list and one in list") {
  Rng rng(3);
  const auto net = random_network(12, 60, rng);
  std::vector<int> out_seen(60, 0), in_seen(60, 0);
  for (NodeId v = 0; v < net.node_count(); ++v) {
    for (ArcId e : net.out_arcs(v)) {
      CHECK(net.arc(e).head == v);
      ++out_seen[static_cast<std::size_t>(e)];
    }
    for (ArcId e : net.in_arcs(v)) {
      CHECK(net.arc(e).tail == v);
      ++in_seen[static_cast<std::size_t>(e)];
    }
  }
  for (int c : out_seen) CHECK(c == 1);
  for (int c : in_seen) CHECK(c == 1);
}

TEST_CASE("load, write, load round-trips") {
  Rng rng(7);
  auto base = random_network(9, 30, rng);
  std::vector<double> costs(9);
  for (std::size_t i = 0; i < costs.size(); ++i) costs[i] = 0.5 + 0.37 * static_cast<double>(i);
  const DirectedNetwork net(9, {base.arcs().begin(), base.arcs().end()}, costs);

  std::ostringstream e, c;
  write_edge_list(e, net);
  write_costs(c, net);
  std::istringstream ein(e.str()), cin(c.str());
  const auto back = load_network(ein, &cin);
  CHECK(back.node_count() == net.node_count());
  REQUIRE(back.arc_count() == net.arc_count());
  for (ArcId a = 0; a < net.arc_count(); ++a) CHECK(back.arc(a) == net.arc(a));
  for (NodeId v = 0; v < net.node_count(); ++v) CHECK(back.cost(v) == net.cost(v));
}

TEST_CASE("weight function validation and fingerprint") {
  CHECK_THROWS(WeightFunction({0.5, 1.1}));
  CHECK_THROWS(WeightFunction({-0.1}));
  const WeightFunction a({0.1, 0.2}), b({0.1, 0.2}), c({0.1, 0.20000000000000004});
  CHECK(a.fingerprint() == b.fingerprint());
  CHECK(a.fingerprint() != c.fingerprint());
  CHECK(WeightFunction::constant(3, 0.25)[2] == 0.25);
}

TEST_CASE("weights file round-trips") {
  const auto net = from_text("0 1\n1 2\n2 0\n");
  const WeightFunction w({0.125, 0.5, 1.0 / 3.0});
  std::ostringstream out;
  write_weights(out, net, w);
  std::istringstream in(out.str());
  CHECK(load_weights(in, net).fingerprint() == w.fingerprint());

  std::istringstream bare("0.1\n0.2\n0.3\n");
  CHECK(load_weights(bare, net)[2] == 0.3);
  std::istringstream wrong_arc("0 1 0.1\n2 1 0.2\n2 0 0.3\n");
  CHECK_THROWS(load_weights(wrong_arc, net));
}

TEST_CASE("edge features are element-wise products") {
  const auto net = from_text("0 1\n1 2\n");
  NodeEmbeddings emb;
  emb[0] = Eigen::Vector2d(1, 2);
  emb[1] = Eigen::Vector2d(3, 4);
  emb[2] = Eigen::Vector2d(0, 0);
  const auto f = edge_features_from_node_embeddings(emb, net);
  CHECK(f.dimension() == 2);
  CHECK(f.feature(0)[0] == 3.0);
  CHECK(f.feature(0)[1] == 8.0);
  CHECK(f.feature(1).isZero());

  SUBCASE("missing node") {
    emb.erase(2);
    CHECK_THROWS(edge_features_from_node_embeddings(emb, net));
  }
  SUBCASE("dimension mismatch") {
    emb[2] = Eigen::Vector3d(1, 1, 1);
    CHECK_THROWS(edge_features_from_node_embeddings(emb, net));
  }
}

TEST_CASE("embedding file round-trips") {
  Rng rng(11);
  const auto emb = random_embeddings(5, 4, 0.2, 1.0, rng);
  std::ostringstream out;
  write_node_embeddings(out, emb);
  std::istringstream in(out.str());
  const auto back = load_node_embeddings(in);
  REQUIRE(back.size() == emb.size());
  for (const auto& [v, x] : emb) CHECK(back.at(v) == x);

  std::istringstream ragged("0 1 2\n1 3\n");
  CHECK_THROWS_AS(load_node_embeddings(ragged), LoadError);
}

TEST_CASE("linear weights") {
  const auto f = features_of({{1, 0}, {0.5, 0.5}, {2, 1}});
  SUBCASE("zero theta gives zero weights") {
    const auto w = linear_weights(f, Eigen::Vector2d::Zero());
    for (double x : w.weights.values()) CHECK(x == 0.0);
    CHECK(w.clamped == 0);
  }
  SUBCASE("out of range values are clamped on request") {
    const auto w = linear_weights(f, Eigen::Vector2d(0.4, 0.4), Clamp::project);
    CHECK(w.weights[0] == doctest::Approx(0.4));
    CHECK(w.weights[2] == 1.0);  // 1.2 clipped
    CHECK(w.clamped == 1);
  }
  SUBCASE("strict mode names the offending arc") {
    try {
      linear_weights(f, Eigen::Vector2d(0.4, 0.4));
      FAIL("expected RangeError");
    } catch (const RangeError& err) {
      CHECK(std::string(err.what()).find("2") != std::string::npos);
    }
  }
  SUBCASE("additive in theta") {
    const Eigen::Vector2d t1(0.1, 0.2), t2(0.05, 0.03);
    const auto a = linear_weights(f, t1), b = linear_weights(f, t2), ab = linear_weights(f, t1 + t2);
    for (ArcId e = 0; e < 3; ++e) CHECK(ab.weights[e] == doctest::Approx(a.weights[e] + b.weights[e]).epsilon(1e-14));
  }
  SUBCASE("dimension mismatch") { CHECK_THROWS(linear_weights(f, Eigen::Vector3d::Zero())); }
}

TEST_CASE("planted ground truth is exactly linear and in range") {
  Rng rng(5);
  const auto net = random_network(25, 319, rng);
  const auto emb = random_embeddings(25, 10, 0.2, 1.0, rng);
  const auto f = edge_features_from_node_embeddings(emb, net);
  CHECK(f.arc_count() == 319);
  CHECK(f.dimension() == 10);

  GroundTruthSpec spec;
  Rng r1(9), r2(9);
  const auto g = synth_ground_truth(net, spec, &f, r1);
  REQUIRE(g.theta_star.has_value());
  const Eigen::VectorXd lin = f.matrix().transpose() * *g.theta_star;
  double worst = 0.0;
  for (ArcId e = 0; e < net.arc_count(); ++e) {
    CHECK(g.weights[e] >= 0.01);
    CHECK(g.weights[e] <= 0.15);
    worst = std::max(worst, std::abs(g.weights[e] - lin[e]));
  }
  CHECK(worst == 0.0);
  CHECK(synth_ground_truth(net, spec, &f, r2).weights.fingerprint() == g.weights.fingerprint());
}

TEST_CASE("uniform ground truth stays inside the open interval") {
  Rng rng(2);
  const auto net = random_network(50, 249, rng);
  GroundTruthSpec spec;
  spec.mode = TruthMode::uniform_random;
  spec.low = 0.0;
  spec.high = 0.1;
  const auto g = synth_ground_truth(net, spec, nullptr, rng);
  CHECK_FALSE(g.theta_star.has_value());
  for (double w : g.weights.values()) {
    CHECK(w > 0.0);
    CHECK(w < 0.1);
  }
}

TEST_CASE("planted mode without features or with an impossible range fails") {
  Rng rng(1);
  const auto net = random_network(4, 6, rng);
  GroundTruthSpec spec;
  CHECK_THROWS(synth_ground_truth(net, spec, nullptr, rng));

  // Two parallel features with ratio 10 cannot both land in [0.5, 0.6].
  const auto f = features_of({{1}, {10}, {1}, {1}, {1}, {1}});
  spec.low = 0.5;
  spec.high = 0.6;
  spec.max_tries = 20;
  CHECK_THROWS(synth_ground_truth(net, spec, &f, rng));
}

TEST_CASE("random network has the requested shape") {
  Rng rng(4);
  const auto net = random_network(25, 319, rng);
  CHECK(net.node_count() == 25);
  CHECK(net.arc_count() == 319);
  CHECK_THROWS(random_network(3, 7, rng));  // more than n(n-1) arcs
}
