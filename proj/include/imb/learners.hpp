#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "imb/diffusion.hpp"
#include "imb/rng.hpp"

namespace imb {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct ExplorationRadii {
  Scalar alpha;
  Scalar beta;
};

/// alpha_t = sqrt(d ln(1 + t m / d) + 4 ln t) + D
/// beta_t  = v alpha_t (sqrt(2 ln 2t) + sqrt(2 ln m + 4 ln t))
template <typename Scalar = double>
ExplorationRadii<Scalar> exploration_radii(std::int64_t t, std::int64_t d, std::int64_t m, Scalar bound_D,
                                           Scalar v) {
  using std::log;
  using std::sqrt;
  if (t < 1) throw std::invalid_argument("round index t must be >= 1");
  const Scalar st(t), sd(d), sm(m);
  const Scalar alpha = sqrt(sd * log(Scalar(1) + st * sm / sd) + Scalar(4) * log(st)) + bound_D;
  const Scalar beta = v * alpha * (sqrt(Scalar(2) * log(Scalar(2) * st)) + sqrt(Scalar(2) * log(sm) + Scalar(4) * log(st)));
  return {alpha, beta};
}

template <typename Scalar>
Scalar project_unit(Scalar x) {
  return std::clamp(x, Scalar(0), Scalar(1));
}

/// Regularized least squares over edge feedback: M = I + sum x x^T,
/// B = sum x y, theta = M^{-1} B. The Cholesky factor of M is refreshed
/// after every batch of observations.
template <typename Scalar = double>
class LeastSquaresState {
 public:
  explicit LeastSquaresState(Eigen::Index dim)
      : design_(Matrix<Scalar>::Identity(dim, dim)), response_(Vector<Scalar>::Zero(dim)),
        theta_(Vector<Scalar>::Zero(dim)) {
    if (dim <= 0) throw std::invalid_argument("feature dimension must be positive");
    factor_.compute(design_);
  }

  Eigen::Index dimension() const { return design_.rows(); }
  const Matrix<Scalar>& design() const { return design_; }
  const Vector<Scalar>& response() const { return response_; }
  const Vector<Scalar>& theta() const { return theta_; }
  const Eigen::LLT<Matrix<Scalar>>& factor() const { return factor_; }

  /// Rank-one accumulation; call refresh() once the batch is complete.
  template <typename Derived>
  void accumulate(const Eigen::MatrixBase<Derived>& x, Scalar y) {
    design_.noalias() += x * x.transpose();
    response_ += y * x;
  }

  void refresh() {
    factor_.compute(design_);
    if (factor_.info() != Eigen::Success) throw std::runtime_error("design matrix lost positive definiteness");
    theta_ = factor_.solve(response_);
  }

  /// Restores a saved state (M must be symmetric positive definite).
  void assign(Matrix<Scalar> design, Vector<Scalar> response) {
    if (design.rows() != dimension() || design.cols() != dimension() || response.size() != dimension()) {
      throw std::invalid_argument("snapshot dimension mismatch");
    }
    design_ = std::move(design);
    response_ = std::move(response);
    refresh();
  }

  /// ||x||_{M^{-1}} = ||L^{-1} x|| for M = L L^T; no explicit inverse.
  template <typename Derived>
  Scalar weighted_norm(const Eigen::MatrixBase<Derived>& x) const {
    return factor_.matrixL().solve(x).norm();
  }

  /// Column-wise weighted norms of a d x m feature matrix.
  Vector<Scalar> weighted_norms(const Matrix<Scalar>& features) const {
    return factor_.matrixL().solve(features).colwise().norm().transpose();
  }

  /// One draw from N(theta, scale^2 M^{-1}) as theta + scale L^{-T} z.
  Vector<Scalar> sample(Scalar scale, Rng& rng) const {
    Vector<Scalar> z(dimension());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = Scalar(rng.normal());
    return theta_ + scale * factor_.matrixU().solve(z);
  }

 private:
  Matrix<Scalar> design_;
  Vector<Scalar> response_;
  Vector<Scalar> theta_;
  Eigen::LLT<Matrix<Scalar>> factor_;
};

/// Applies one round of feedback: features is d x m, observations index its columns.
template <typename Scalar>
void ridge_update(LeastSquaresState<Scalar>& state, const Matrix<Scalar>& features,
                  std::span<const Observation> observations) {
  if (features.rows() != state.dimension()) throw std::invalid_argument("feature dimension mismatch");
  if (observations.empty()) return;
  for (const Observation& o : observations) {
    state.accumulate(features.col(o.arc), o.success ? Scalar(1) : Scalar(0));
  }
  state.refresh();
}

/// Feedback given directly as (x, y) pairs.
template <typename Scalar>
void ridge_update(LeastSquaresState<Scalar>& state, std::span<const std::pair<Vector<Scalar>, bool>> pairs) {
  if (pairs.empty()) return;
  for (const auto& [x, y] : pairs) {
    if (x.size() != state.dimension()) throw std::invalid_argument("feature dimension mismatch");
    state.accumulate(x, y ? Scalar(1) : Scalar(0));
  }
  state.refresh();
}

template <typename Scalar>
Scalar weighted_norm(const LeastSquaresState<Scalar>& state, const Vector<Scalar>& x) {
  return state.weighted_norm(x);
}

/// Cumulative Oversampling. Each round draws one theta~ and keeps, per arc,
/// the running maximum of the standardized samples sigma(e); the estimate is
/// w~_t(e) = max(x_e.theta~_t, x_e.theta_t + sigma_{t-1}(e) alpha_t ||x_e||).
template <typename Scalar = double>
class CumulativeOversampler {
 public:
  CumulativeOversampler(Eigen::Index dim, Eigen::Index arc_count, Scalar v, Scalar bound_D)
      : base_(dim), sigma_(arc_count, -std::numeric_limits<Scalar>::infinity()), v_(v), bound_D_(bound_D) {
    if (!(v > Scalar(0))) throw std::invalid_argument("CO hyper-parameter v must be positive");
    if (!(bound_D > Scalar(0))) throw std::invalid_argument("CO bound D must be positive");
  }

  LeastSquaresState<Scalar>& base() { return base_; }
  const LeastSquaresState<Scalar>& base() const { return base_; }
  /// sigma_t(e) after the latest propose(); -inf before the first round.
  const std::vector<Scalar>& sigma() const { return sigma_; }
  std::vector<Scalar>& sigma() { return sigma_; }
  Scalar v() const { return v_; }
  Scalar bound_D() const { return bound_D_; }

  struct Proposal {
    Vector<Scalar> tilde_w;  ///< unprojected estimate
    Vector<Scalar> u;        ///< projected onto [0, 1]
  };

  /// Round t estimate; updates sigma to sigma_t. features is d x m.
  Proposal propose(const Matrix<Scalar>& features, std::int64_t t, Rng& rng) {
    const auto m = static_cast<std::size_t>(features.cols());
    if (m != sigma_.size()) throw std::invalid_argument("feature table does not match arc count");
    const Scalar alpha = exploration_radii<Scalar>(t, features.rows(), features.cols(), bound_D_, v_).alpha;
    const Vector<Scalar> sampled = base_.sample(v_ * alpha, rng);
    const Vector<Scalar> mean = features.transpose() * base_.theta();
    const Vector<Scalar> draw = features.transpose() * sampled;
    const Vector<Scalar> norms = base_.weighted_norms(features);

    Proposal out{Vector<Scalar>(features.cols()), Vector<Scalar>(features.cols())};
    for (std::size_t e = 0; e < m; ++e) {
      const auto i = static_cast<Eigen::Index>(e);
      const Scalar radius = alpha * norms[i];
      if (!(radius > Scalar(0))) {
        // Zero feature vector: no information in either direction.
        sigma_[e] = Scalar(0);
        out.tilde_w[i] = mean[i];
      } else {
        const Scalar carried = std::isinf(sigma_[e]) ? sigma_[e] : mean[i] + sigma_[e] * radius;
        const Scalar w = std::max(draw[i], carried);
        sigma_[e] = (w - mean[i]) / radius;
        out.tilde_w[i] = w;
      }
      out.u[i] = project_unit(out.tilde_w[i]);
    }
    return out;
  }

 private:
  LeastSquaresState<Scalar> base_;
  std::vector<Scalar> sigma_;
  Scalar v_;
  Scalar bound_D_;
};

/// Linear Thompson sampling: u(e) = proj(x_e . theta~), theta~ ~ N(theta, v^2 alpha_t^2 M^{-1}).
template <typename Scalar>
Vector<Scalar> lin_ts_weights(const LeastSquaresState<Scalar>& state, const Matrix<Scalar>& features,
                              std::int64_t t, Scalar v, Scalar bound_D, Rng& rng) {
  const Scalar alpha = exploration_radii<Scalar>(t, features.rows(), features.cols(), bound_D, v).alpha;
  const Vector<Scalar> sampled = state.sample(v * alpha, rng);
  return (features.transpose() * sampled).unaryExpr([](Scalar x) { return project_unit(x); });
}

/// Linear UCB: u(e) = proj(x_e . theta + alpha_t ||x_e||_{M^{-1}}).
template <typename Scalar>
Vector<Scalar> lin_ucb_weights(const LeastSquaresState<Scalar>& state, const Matrix<Scalar>& features,
                               std::int64_t t, Scalar bound_D) {
  const Scalar alpha = exploration_radii<Scalar>(t, features.rows(), features.cols(), bound_D, Scalar(1)).alpha;
  const Vector<Scalar> raw = features.transpose() * state.theta() + alpha * state.weighted_norms(features);
  return raw.unaryExpr([](Scalar x) { return project_unit(x); });
}

/// Per-arc observation and success counts for the feature-free baseline.
class EdgeCounter {
 public:
  explicit EdgeCounter(ArcId arc_count)
      : observed_(static_cast<std::size_t>(arc_count), 0), successes_(static_cast<std::size_t>(arc_count), 0) {}

  void update(std::span<const Observation> observations);
  std::uint64_t observed(ArcId e) const { return observed_[static_cast<std::size_t>(e)]; }
  std::uint64_t successes(ArcId e) const { return successes_[static_cast<std::size_t>(e)]; }
  ArcId arc_count() const { return static_cast<ArcId>(observed_.size()); }

 private:
  std::vector<std::uint64_t> observed_;
  std::vector<std::uint64_t> successes_;
};

/// CUCB: u(e) = proj(mean(e) + sqrt(3 ln t / (2 T_e))), and 1 for unseen arcs.
Eigen::VectorXd cucb_weights(const EdgeCounter& counter, std::int64_t t);

enum class Algorithm { co, lin_ts, lin_ucb, cucb };

/// Accepts "co", "lin-ts", "lin-ucb", "cucb"; throws std::invalid_argument otherwise.
Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm alg);

/// Closed-form regret bound for CO:
/// (alpha_T + beta_T) n m / eta * sqrt(d T ln(1 + mT/d) / ln 2)
///   + n (4 m sqrt(pi) e^{1/(2 v^2)} / v + pi^2 / 3).
/// Throws std::domain_error when v <= 0.
double regret_bound_constant(double n, double m, double d, double T, double v, double bound_D,
                             double eta = 1.0 - 1.0 / std::numbers::e);

/// Learner checkpoint: round counter, M (row-major), B, and per-arc sigma.
struct LearnerSnapshot {
  std::int64_t t = 1;
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
  std::vector<double> sigma;
};

void write_snapshot(std::ostream& out, const LearnerSnapshot& snap);
LearnerSnapshot read_snapshot(std::istream& in);

}  // namespace imb
