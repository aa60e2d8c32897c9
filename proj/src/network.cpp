#include "imb/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <utility>

namespace imb {

namespace {

std::string line_message(std::size_t line, const std::string& what) {
  if (line == 0) return what;
  return "line " + std::to_string(line) + ": " + what;
}

bool is_blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

// Parses a node id token; rejects negatives, fractions and overflow.
NodeId parse_node(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  long long value = 0;
  try {
    value = std::stoll(token, &used);
  } catch (const std::exception&) {
    throw LoadError(line, "malformed node id '" + token + "'");
  }
  if (used != token.size() || value < 0 || value > std::numeric_limits<NodeId>::max() - 1) {
    throw LoadError(line, "malformed node id '" + token + "'");
  }
  return static_cast<NodeId>(value);
}

double parse_real(const std::string& token, std::size_t line) {
  std::size_t used = 0;
  double value = 0;
  try {
    value = std::stod(token, &used);
  } catch (const std::exception&) {
    throw LoadError(line, "malformed number '" + token + "'");
  }
  if (used != token.size() || !std::isfinite(value)) {
    throw LoadError(line, "malformed number '" + token + "'");
  }
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  for (std::string tok; in >> tok;) tokens.push_back(tok);
  return tokens;
}

std::uint64_t fnv1a(std::span<const double> values) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : values) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

void build_csr(NodeId n, const std::vector<Arc>& arcs, bool by_head,
               std::vector<std::size_t>& offsets, std::vector<ArcId>& list) {
  offsets.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const Arc& a : arcs) ++offsets[static_cast<std::size_t>(by_head ? a.head : a.tail) + 1];
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  list.assign(arcs.size(), 0);
  std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
  for (std::size_t e = 0; e < arcs.size(); ++e) {
    const auto v = static_cast<std::size_t>(by_head ? arcs[e].head : arcs[e].tail);
    list[fill[v]++] = static_cast<ArcId>(e);
  }
}

}  // namespace

LoadError::LoadError(std::size_t line, const std::string& what)
    : std::runtime_error(line_message(line, what)), line_(line) {}

DirectedNetwork::DirectedNetwork(NodeId node_count, std::vector<Arc> arcs, std::vector<double> costs)
    : node_count_(node_count), arcs_(std::move(arcs)), costs_(std::move(costs)) {
  if (node_count_ <= 0) throw std::invalid_argument("network needs at least one node");
  if (costs_.size() != static_cast<std::size_t>(node_count_)) {
    throw std::invalid_argument("cost vector size does not match node count");
  }
  for (std::size_t v = 0; v < costs_.size(); ++v) {
    if (!(costs_[v] > 0.0) || !std::isfinite(costs_[v])) {
      throw std::invalid_argument("cost of node " + std::to_string(v) + " must be positive");
    }
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  for (std::size_t e = 0; e < arcs_.size(); ++e) {
    const Arc& a = arcs_[e];
    if (!contains(a.head) || !contains(a.tail)) {
      throw std::invalid_argument("arc " + std::to_string(e) + " references unknown node");
    }
    if (a.head == a.tail) throw std::invalid_argument("arc " + std::to_string(e) + " is a self-loop");
    if (!seen.emplace(a.head, a.tail).second) {
      throw std::invalid_argument("arc " + std::to_string(e) + " is a duplicate");
    }
  }
  build_csr(node_count_, arcs_, true, out_offsets_, out_list_);
  build_csr(node_count_, arcs_, false, in_offsets_, in_list_);
}

std::span<const ArcId> DirectedNetwork::out_arcs(NodeId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {out_list_.data() + out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]};
}

std::span<const ArcId> DirectedNetwork::in_arcs(NodeId v) const {
  const auto i = static_cast<std::size_t>(v);
  return {in_list_.data() + in_offsets_[i], in_offsets_[i + 1] - in_offsets_[i]};
}

double DirectedNetwork::cost_of(std::span<const NodeId> nodes) const {
  double total = 0.0;
  for (NodeId v : nodes) total += cost(v);
  return total;
}

double DirectedNetwork::total_cost() const {
  double total = 0.0;
  for (double c : costs_) total += c;
  return total;
}

double DirectedNetwork::max_cost() const { return *std::max_element(costs_.begin(), costs_.end()); }

DirectedNetwork load_network(std::istream& edge_list, std::istream* cost_list, double default_cost) {
  std::vector<Arc> arcs;
  std::set<std::pair<NodeId, NodeId>> seen;
  NodeId max_id = -1;
  std::size_t lineno = 0;
  for (std::string line; std::getline(edge_list, line);) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    const auto tokens = split(line);
    if (tokens.size() != 2) throw LoadError(lineno, "expected 'u v', got '" + line + "'");
    const NodeId u = parse_node(tokens[0], lineno);
    const NodeId v = parse_node(tokens[1], lineno);
    if (u == v) throw LoadError(lineno, "self-loop " + tokens[0] + " -> " + tokens[1]);
    if (!seen.emplace(u, v).second) {
      throw LoadError(lineno, "duplicate arc " + tokens[0] + " -> " + tokens[1]);
    }
    arcs.push_back({u, v});
    max_id = std::max({max_id, u, v});
  }

  std::map<NodeId, std::pair<double, std::size_t>> listed;
  if (cost_list != nullptr) {
    lineno = 0;
    for (std::string line; std::getline(*cost_list, line);) {
      ++lineno;
      if (is_blank_or_comment(line)) continue;
      const auto tokens = split(line);
      if (tokens.size() != 2) throw LoadError(lineno, "expected 'node cost', got '" + line + "'");
      const NodeId v = parse_node(tokens[0], lineno);
      const double c = parse_real(tokens[1], lineno);
      if (!(c > 0.0)) throw LoadError(lineno, "cost of node " + tokens[0] + " must be positive");
      if (!listed.emplace(v, std::pair{c, lineno}).second) {
        throw LoadError(lineno, "node " + tokens[0] + " listed twice");
      }
      max_id = std::max(max_id, v);
    }
  } else if (!(default_cost > 0.0)) {
    throw LoadError(0, "default cost must be positive");
  }
  if (max_id < 0) throw LoadError(0, "network has no nodes");

  const NodeId n = max_id + 1;
  std::vector<double> costs(static_cast<std::size_t>(n), default_cost);
  if (cost_list != nullptr) {
    for (NodeId v = 0; v < n; ++v) {
      auto it = listed.find(v);
      if (it == listed.end()) throw LoadError(0, "no cost given for node " + std::to_string(v));
      costs[static_cast<std::size_t>(v)] = it->second.first;
    }
  }
  return DirectedNetwork(n, std::move(arcs), std::move(costs));
}

DirectedNetwork load_network_file(const std::filesystem::path& edge_path,
                                  const std::optional<std::filesystem::path>& cost_path,
                                  double default_cost) {
  std::ifstream edges(edge_path);
  if (!edges) throw LoadError(0, "cannot open " + edge_path.string());
  if (!cost_path) return load_network(edges, nullptr, default_cost);
  std::ifstream costs(*cost_path);
  if (!costs) throw LoadError(0, "cannot open " + cost_path->string());
  return load_network(edges, &costs, default_cost);
}

void write_edge_list(std::ostream& out, const DirectedNetwork& net) {
  for (const Arc& a : net.arcs()) out << a.head << ' ' << a.tail << '\n';
}

void write_costs(std::ostream& out, const DirectedNetwork& net) {
  char buf[64];
  for (NodeId v = 0; v < net.node_count(); ++v) {
    std::snprintf(buf, sizeof buf, "%d %.17g\n", v, net.cost(v));
    out << buf;
  }
}

WeightFunction::WeightFunction(std::vector<double> weights) : weights_(std::move(weights)) {
  for (std::size_t e = 0; e < weights_.size(); ++e) {
    if (!(weights_[e] >= 0.0 && weights_[e] <= 1.0)) {
      throw RangeError("weight of arc " + std::to_string(e) + " outside [0, 1]");
    }
  }
  fingerprint_ = fnv1a(weights_);
}

WeightFunction WeightFunction::constant(ArcId arc_count, double w) {
  return WeightFunction(std::vector<double>(static_cast<std::size_t>(arc_count), w));
}

WeightFunction load_weights(std::istream& in, const DirectedNetwork& net) {
  std::map<std::pair<NodeId, NodeId>, ArcId> lookup;
  for (ArcId e = 0; e < net.arc_count(); ++e) lookup[{net.arc(e).head, net.arc(e).tail}] = e;

  std::vector<double> w(static_cast<std::size_t>(net.arc_count()), -1.0);
  std::size_t lineno = 0;
  ArcId next = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    const auto tokens = split(line);
    ArcId e = 0;
    double value = 0;
    if (tokens.size() == 1) {
      if (next >= net.arc_count()) throw LoadError(lineno, "more weights than arcs");
      e = next++;
      value = parse_real(tokens[0], lineno);
    } else if (tokens.size() == 3) {
      auto it = lookup.find({parse_node(tokens[0], lineno), parse_node(tokens[1], lineno)});
      if (it == lookup.end()) throw LoadError(lineno, "unknown arc " + tokens[0] + " -> " + tokens[1]);
      e = it->second;
      value = parse_real(tokens[2], lineno);
    } else {
      throw LoadError(lineno, "expected 'w' or 'u v w', got '" + line + "'");
    }
    if (!(value >= 0.0 && value <= 1.0)) throw LoadError(lineno, "weight outside [0, 1]");
    w[static_cast<std::size_t>(e)] = value;
  }
  for (ArcId e = 0; e < net.arc_count(); ++e) {
    if (w[static_cast<std::size_t>(e)] < 0.0) {
      throw LoadError(0, "no weight given for arc " + std::to_string(e));
    }
  }
  return WeightFunction(std::move(w));
}

void write_weights(std::ostream& out, const DirectedNetwork& net, const WeightFunction& w) {
  char buf[96];
  for (ArcId e = 0; e < net.arc_count(); ++e) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", net.arc(e).head, net.arc(e).tail, w[e]);
    out << buf;
  }
}

EdgeFeatureTable::EdgeFeatureTable(Eigen::MatrixXd columns) : columns_(std::move(columns)) {
  if (columns_.rows() <= 0) throw std::invalid_argument("feature dimension must be positive");
  if (!columns_.allFinite()) throw std::invalid_argument("edge features must be finite");
}

NodeEmbeddings load_node_embeddings(std::istream& in) {
  NodeEmbeddings emb;
  Eigen::Index dim = -1;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (is_blank_or_comment(line)) continue;
    const auto tokens = split(line);
    if (tokens.size() < 2) throw LoadError(lineno, "expected 'node f1 ... fd'");
    const NodeId v = parse_node(tokens[0], lineno);
    const auto d = static_cast<Eigen::Index>(tokens.size() - 1);
    if (dim >= 0 && d != dim) {
      throw LoadError(lineno, "dimension " + std::to_string(d) + " differs from " + std::to_string(dim));
    }
    dim = d;
    Eigen::VectorXd x(d);
    for (Eigen::Index i = 0; i < d; ++i) x[i] = parse_real(tokens[static_cast<std::size_t>(i) + 1], lineno);
    if (!emb.emplace(v, std::move(x)).second) throw LoadError(lineno, "node listed twice");
  }
  return emb;
}

void write_node_embeddings(std::ostream& out, const NodeEmbeddings& emb) {
  char buf[64];
  for (const auto& [v, x] : emb) {
    out << v;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      std::snprintf(buf, sizeof buf, " %.17g", x[i]);
      out << buf;
    }
    out << '\n';
  }
}

EdgeFeatureTable edge_features_from_node_embeddings(const NodeEmbeddings& emb,
                                                    const DirectedNetwork& net) {
  if (emb.empty()) throw std::invalid_argument("no node embeddings");
  const Eigen::Index d = emb.begin()->second.size();
  auto lookup = [&](NodeId v) -> const Eigen::VectorXd& {
    auto it = emb.find(v);
    if (it == emb.end()) throw std::invalid_argument("missing embedding for node " + std::to_string(v));
    if (it->second.size() != d) {
      throw std::invalid_argument("embedding of node " + std::to_string(v) + " has wrong dimension");
    }
    return it->second;
  };
  Eigen::MatrixXd x(d, net.arc_count());
  for (ArcId e = 0; e < net.arc_count(); ++e) {
    x.col(e) = lookup(net.arc(e).head).cwiseProduct(lookup(net.arc(e).tail));
  }
  return EdgeFeatureTable(std::move(x));
}

LinearWeights linear_weights(const EdgeFeatureTable& features, const Eigen::VectorXd& theta, Clamp clamp) {
  if (theta.size() != features.dimension()) {
    throw std::invalid_argument("theta dimension does not match feature dimension");
  }
  const Eigen::VectorXd raw = features.matrix().transpose() * theta;
  std::vector<double> w(static_cast<std::size_t>(raw.size()));
  std::vector<ArcId> offending;
  for (Eigen::Index e = 0; e < raw.size(); ++e) {
    const double x = raw[e];
    if (x >= 0.0 && x <= 1.0) {
      w[static_cast<std::size_t>(e)] = x;
      continue;
    }
    offending.push_back(static_cast<ArcId>(e));
    w[static_cast<std::size_t>(e)] = std::clamp(x, 0.0, 1.0);
  }
  if (clamp == Clamp::strict && !offending.empty()) {
    std::string msg = "linear weights outside [0, 1] on arcs";
    for (std::size_t i = 0; i < offending.size() && i < 20; ++i) msg += " " + std::to_string(offending[i]);
    if (offending.size() > 20) msg += " ... (" + std::to_string(offending.size()) + " total)";
    throw RangeError(msg);
  }
  return {WeightFunction(std::move(w)), offending.size()};
}

GroundTruth synth_ground_truth(const DirectedNetwork& net, const GroundTruthSpec& spec,
                               const EdgeFeatureTable* features, Rng& rng) {
  if (!(spec.low >= 0.0 && spec.low < spec.high && spec.high <= 1.0)) {
    throw std::invalid_argument("ground-truth range must satisfy 0 <= low < high <= 1");
  }
  if (spec.mode == TruthMode::uniform_random) {
    std::vector<double> w(static_cast<std::size_t>(net.arc_count()));
    for (double& x : w) {
      do {
        x = spec.low + (spec.high - spec.low) * rng.uniform();
      } while (x <= spec.low);
    }
    return {std::nullopt, WeightFunction(std::move(w))};
  }

  if (features == nullptr || features->arc_count() != net.arc_count()) {
    throw std::invalid_argument("planted ground truth needs one feature vector per arc");
  }
  const Eigen::Index d = features->dimension();
  const Eigen::MatrixXd& x = features->matrix();
  for (int attempt = 0; attempt < spec.max_tries; ++attempt) {
    // Half-normal directions first: they suit nonnegative features. Later
    // attempts use full Gaussian directions.
    Eigen::VectorXd dir(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const double z = rng.normal();
      dir[i] = attempt < spec.max_tries / 2 ? std::abs(z) : z;
    }
    Eigen::VectorXd s = x.transpose() * dir;
    if (s.size() == 0) return {dir * 0.0, WeightFunction()};
    if (s.maxCoeff() <= 0.0) {
      dir = -dir;
      s = -s;
    }
    const double lo = s.minCoeff();
    const double hi = s.maxCoeff();
    if (!(lo > 0.0) || hi / lo > spec.high / spec.low) continue;
    const double scale = std::sqrt((spec.low / lo) * (spec.high / hi));
    Eigen::VectorXd theta = scale * dir;
    const Eigen::VectorXd w = x.transpose() * theta;
    if (w.minCoeff() < spec.low || w.maxCoeff() > spec.high) continue;
    return {theta, WeightFunction(std::vector<double>(w.data(), w.data() + w.size()))};
  }
  throw RangeError("could not plant a linear ground truth inside the requested range after " +
                   std::to_string(spec.max_tries) + " attempts");
}

DirectedNetwork random_network(NodeId node_count, ArcId arc_count, Rng& rng) {
  const auto n = static_cast<std::int64_t>(node_count);
  if (n <= 0 || arc_count < 0 || arc_count > n * (n - 1)) {
    throw std::invalid_argument("arc count not realizable on this many nodes");
  }
  std::set<std::pair<NodeId, NodeId>> seen;
  std::vector<Arc> arcs;
  while (static_cast<ArcId>(arcs.size()) < arc_count) {
    const auto u = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n)));
    const auto v = static_cast<NodeId>(rng.index(static_cast<std::uint64_t>(n)));
    if (u == v || !seen.emplace(u, v).second) continue;
    arcs.push_back({u, v});
  }
  return DirectedNetwork(node_count, std::move(arcs), std::vector<double>(static_cast<std::size_t>(n), 1.0));
}

NodeEmbeddings random_embeddings(NodeId node_count, Eigen::Index dim, double low, double high, Rng& rng) {
  NodeEmbeddings emb;
  for (NodeId v = 0; v < node_count; ++v) {
    Eigen::VectorXd x(dim);
    for (Eigen::Index i = 0; i < dim; ++i) x[i] = low + (high - low) * rng.uniform();
    emb.emplace(v, std::move(x));
  }
  return emb;
}

}  // namespace imb
