#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "imb/rng.hpp"

namespace imb {

using NodeId = std::int32_t;
using ArcId = std::int32_t;

/// Directed arc head -> tail; influence flows from head to tail.
struct Arc {
  NodeId head;
  NodeId tail;
  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Raised on malformed input files; `line()` is 0 when no line applies.
class LoadError : public std::runtime_error {
 public:
  LoadError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Immutable digraph with node commissions. Arc ids follow insertion order and
/// index every per-arc array in the library.
class DirectedNetwork {
 public:
  DirectedNetwork() = default;
  /// Validates ids, rejects self-loops and duplicate arcs, requires costs > 0.
  DirectedNetwork(NodeId node_count, std::vector<Arc> arcs, std::vector<double> costs);

  NodeId node_count() const { return node_count_; }
  ArcId arc_count() const { return static_cast<ArcId>(arcs_.size()); }
  bool contains(NodeId v) const { return v >= 0 && v < node_count_; }

  const Arc& arc(ArcId e) const { return arcs_[static_cast<std::size_t>(e)]; }
  std::span<const Arc> arcs() const { return arcs_; }

  /// Arc ids leaving / entering a node, ascending.
  std::span<const ArcId> out_arcs(NodeId v) const;
  std::span<const ArcId> in_arcs(NodeId v) const;

  double cost(NodeId v) const { return costs_[static_cast<std::size_t>(v)]; }
  std::span<const double> costs() const { return costs_; }
  double cost_of(std::span<const NodeId> nodes) const;
  double total_cost() const;
  double max_cost() const;

 private:
  NodeId node_count_ = 0;
  std::vector<Arc> arcs_;
  std::vector<double> costs_;
  std::vector<std::size_t> out_offsets_, in_offsets_;
  std::vector<ArcId> out_list_, in_list_;
};

/// Reads a SNAP-style "u v" edge list ('#' lines and blank lines ignored) and
/// an optional "node cost" list. Without a cost list every node costs
/// `default_cost`. Node count is one past the largest id seen in either file.
DirectedNetwork load_network(std::istream& edge_list, std::istream* cost_list = nullptr,
                             double default_cost = 1.0);
DirectedNetwork load_network_file(const std::filesystem::path& edge_path,
                                  const std::optional<std::filesystem::path>& cost_path = std::nullopt,
                                  double default_cost = 1.0);

void write_edge_list(std::ostream& out, const DirectedNetwork& net);
void write_costs(std::ostream& out, const DirectedNetwork& net);

/// Per-arc activation probabilities, validated into [0, 1].
class WeightFunction {
 public:
  WeightFunction() = default;
  explicit WeightFunction(std::vector<double> weights);
  static WeightFunction constant(ArcId arc_count, double w);

  double operator[](ArcId e) const { return weights_[static_cast<std::size_t>(e)]; }
  ArcId size() const { return static_cast<ArcId>(weights_.size()); }
  std::span<const double> values() const { return weights_; }

  /// FNV-1a over the bit patterns; equal weights give equal fingerprints.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  std::vector<double> weights_;
  std::uint64_t fingerprint_ = 0;
};

/// "u v w" lines in arc order, or one weight per line.
WeightFunction load_weights(std::istream& in, const DirectedNetwork& net);
void write_weights(std::ostream& out, const DirectedNetwork& net, const WeightFunction& w);

/// Edge feature vectors stored column-wise: column e is x_e.
class EdgeFeatureTable {
 public:
  EdgeFeatureTable() = default;
  explicit EdgeFeatureTable(Eigen::MatrixXd columns);

  Eigen::Index dimension() const { return columns_.rows(); }
  ArcId arc_count() const { return static_cast<ArcId>(columns_.cols()); }
  auto feature(ArcId e) const { return columns_.col(e); }
  const Eigen::MatrixXd& matrix() const { return columns_; }

 private:
  Eigen::MatrixXd columns_;
};

using NodeEmbeddings = std::map<NodeId, Eigen::VectorXd>;

/// "node f1 ... fd" per line; every line must carry the same dimension.
NodeEmbeddings load_node_embeddings(std::istream& in);
void write_node_embeddings(std::ostream& out, const NodeEmbeddings& emb);

/// x_(u,v) = emb_u .* emb_v for every arc.
EdgeFeatureTable edge_features_from_node_embeddings(const NodeEmbeddings& emb,
                                                    const DirectedNetwork& net);

enum class Clamp { strict, project };

struct LinearWeights {
  WeightFunction weights;
  std::size_t clamped = 0;
};

/// w(e) = x_e . theta. Strict mode throws RangeError naming the offending
/// arcs; project mode clips into [0, 1] and counts the clipped arcs.
LinearWeights linear_weights(const EdgeFeatureTable& features, const Eigen::VectorXd& theta,
                             Clamp clamp = Clamp::strict);

enum class TruthMode { linear_planted, uniform_random };

struct GroundTruthSpec {
  TruthMode mode = TruthMode::linear_planted;
  double low = 0.01;
  double high = 0.15;
  int max_tries = 1000;
};

struct GroundTruth {
  std::optional<Eigen::VectorXd> theta_star;
  WeightFunction weights;
};

/// Planted mode draws a direction, rescales it so every x_e . theta lands in
/// [low, high], and retries up to max_tries directions before giving up.
/// Uniform mode draws each weight i.i.d. from the open interval (low, high).
GroundTruth synth_ground_truth(const DirectedNetwork& net, const GroundTruthSpec& spec,
                               const EdgeFeatureTable* features, Rng& rng);

/// Uniform random simple digraph with exactly `arc_count` arcs and unit costs.
DirectedNetwork random_network(NodeId node_count, ArcId arc_count, Rng& rng);

/// i.i.d. Uniform(low, high) node embeddings.
NodeEmbeddings random_embeddings(NodeId node_count, Eigen::Index dim, double low, double high,
                                 Rng& rng);

}  // namespace imb
