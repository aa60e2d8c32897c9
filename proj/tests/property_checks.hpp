// Property checks shared by the unit suite and the acceptance gate. Each
// returns an empty string on success, otherwise a description of the first
// violation.
#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "imb/diffusion.hpp"
#include "imb/harness.hpp"
#include "imb/learners.hpp"
#include "imb/network.hpp"
#include "imb/rr_sets.hpp"

namespace imb::checks {

inline WeightFunction random_weights(ArcId m, Rng& rng) {
  std::vector<double> w(static_cast<std::size_t>(m));
  for (double& x : w) x = rng.uniform();
  return WeightFunction(std::move(w));
}

/// f(S) <= f(S + v) and f(S + v) - f(S) >= f(T + v) - f(T) for all S c T,
/// v outside T, on `graphs` random digraphs with 2..5 nodes.
inline std::string diffusion_monotone_submodular(int graphs, std::uint64_t seed) {
  Rng rng(seed);
  for (int g = 0; g < graphs; ++g) {
    const auto n = static_cast<NodeId>(2 + rng.index(4));
    const auto m = static_cast<ArcId>(rng.index(static_cast<std::uint64_t>(n * (n - 1)) + 1));
    const auto net = random_network(n, m, rng);
    const auto w = random_weights(m, rng);
    const auto f = exact_spread_table(net, w);
    const unsigned full = (1U << n) - 1;
    for (unsigned S = 0; S <= full; ++S) {
      for (unsigned T = S;; T = (T + 1) | S) {
        for (NodeId v = 0; v < n; ++v) {
          const unsigned bit = 1U << v;
          if (T & bit) continue;
          const double gain_s = f[S | bit] - f[S];
          const double gain_t = f[T | bit] - f[T];
          if (gain_s < -1e-12 || gain_s < gain_t - 1e-12) {
            std::ostringstream os;
            os << "graph " << g << ": S=" << S << " T=" << T << " v=" << v << " gains " << gain_s << " < " << gain_t;
            return os.str();
          }
        }
        if (T == full) break;
      }
    }
  }
  return {};
}

/// Same seed, same collection; and F_R is monotone submodular on it.
inline std::string coverage_determinism(int instances, std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const auto net = random_network(6, 16, rng);
    const auto w = random_weights(16, rng);
    CeiParams p;
    p.eps = max_cei_eps(6);
    const std::uint64_t s = rng();
    Rng a(s), b(s);
    const auto x = build_collection(net, w, p, a);
    const auto y = build_collection(net, w, p, b);
    if (x.size() != y.size() || x.total_width() != y.total_width()) return "collection sizes differ under one seed";
    for (std::size_t k = 0; k < x.size(); ++k) {
      const auto sx = x.set(k), sy = y.set(k);
      if (!std::equal(sx.begin(), sx.end(), sy.begin(), sy.end())) return "collection contents differ under one seed";
    }
    std::vector<double> F(64);
    for (unsigned S = 0; S < 64; ++S) {
      std::vector<NodeId> seeds;
      for (NodeId v = 0; v < 6; ++v) {
        if ((S >> v) & 1U) seeds.push_back(v);
      }
      F[S] = x.coverage_fraction(seeds);
      if (F[S] != y.coverage_fraction(seeds)) return "coverage differs between identical collections";
    }
    for (unsigned S = 0; S < 64; ++S) {
      for (unsigned T = S;; T = (T + 1) | S) {
        for (NodeId v = 0; v < 6; ++v) {
          const unsigned bit = 1U << v;
          if (T & bit) continue;
          if (F[S | bit] < F[S] || F[S | bit] - F[S] < F[T | bit] - F[T] - 1e-15) {
            return "coverage function not monotone submodular";
          }
        }
        if (T == 63) break;
      }
    }
  }
  return {};
}

/// Incremental ridge state equals I + sum x x^T, sum x y and M^-1 B rebuilt
/// from the observation log (tolerance 1e-8), and a snapshot restores it.
inline std::string state_rebuild(std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index d = 10;
  const ArcId m = 319;
  Eigen::MatrixXd f(d, m);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = 0.04 + 0.96 * rng.uniform();
  CumulativeOversampler<double> co(d, m, 0.5, 1.0);
  std::vector<Observation> log;
  for (std::int64_t t = 1; t <= 200; ++t) {
    co.propose(f, t, rng);
    std::vector<Observation> batch;
    const auto k = rng.index(40);
    for (std::uint64_t j = 0; j < k; ++j) batch.push_back({static_cast<ArcId>(rng.index(m)), rng.bernoulli(0.1)});
    ridge_update(co.base(), f, std::span<const Observation>(batch));
    log.insert(log.end(), batch.begin(), batch.end());
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd B = Eigen::VectorXd::Zero(d);
  for (const auto& o : log) {
    M += f.col(o.arc) * f.col(o.arc).transpose();
    if (o.success) B += f.col(o.arc);
  }
  const Eigen::VectorXd theta = M.ldlt().solve(B);
  const double tol = 1e-8 * (1.0 + B.norm());
  if ((co.base().design() - M).cwiseAbs().maxCoeff() > 1e-8 * (1.0 + M.cwiseAbs().maxCoeff())) return "design matrix drifted from the log";
  if ((co.base().response() - B).norm() > tol) return "response vector drifted from the log";
  if ((co.base().theta() - theta).norm() > tol) return "theta differs from M^-1 B";

  std::stringstream buf;
  write_snapshot(buf, {201, co.base().design(), co.base().response(), co.sigma()});
  const auto snap = read_snapshot(buf);
  CumulativeOversampler<double> back(d, m, 0.5, 1.0);
  back.base().assign(snap.design, snap.response);
  back.sigma() = snap.sigma;
  Rng r1(seed + 1), r2(seed + 1);
  if (co.propose(f, 201, r1).u != back.propose(f, 201, r2).u) return "restored snapshot proposes differently";
  return {};
}

/// Two runs under one master seed write identical trace and summary CSVs.
inline std::string csv_byte_identical(const ExperimentConfig& config) {
  std::string first;
  for (int run = 0; run < 2; ++run) {
    const auto result = run_experiment(config);
    std::ostringstream out;
    write_trace_csv(out, result);
    write_summary_csv(out, result);
    if (run == 0) {
      first = out.str();
    } else if (out.str() != first) {
      return "CSV output differs between runs";
    }
  }
  return {};
}

}  // namespace imb::checks
