#include "imb/learners.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

namespace imb {

void EdgeCounter::update(std::span<const Observation> observations) {
  for (const Observation& o : observations) {
    const auto e = static_cast<std::size_t>(o.arc);
    ++observed_.at(e);
    if (o.success) ++successes_[e];
  }
}

Eigen::VectorXd cucb_weights(const EdgeCounter& counter, std::int64_t t) {
  if (t < 1) throw std::invalid_argument("round index t must be >= 1");
  const double log_t = std::log(static_cast<double>(t));
  Eigen::VectorXd u(counter.arc_count());
  for (ArcId e = 0; e < counter.arc_count(); ++e) {
    const auto seen = static_cast<double>(counter.observed(e));
    if (seen == 0.0) {
      u[e] = 1.0;
      continue;
    }
    const double mean = static_cast<double>(counter.successes(e)) / seen;
    u[e] = project_unit(mean + std::sqrt(3.0 * log_t / (2.0 * seen)));
  }
  return u;
}

Algorithm parse_algorithm(std::string_view name) {
  if (name == "co") return Algorithm::co;
  if (name == "lin-ts" || name == "ts") return Algorithm::lin_ts;
  if (name == "lin-ucb" || name == "ucb") return Algorithm::lin_ucb;
  if (name == "cucb") return Algorithm::cucb;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::string_view algorithm_name(Algorithm alg) {
  switch (alg) {
    case Algorithm::co: return "co";
    case Algorithm::lin_ts: return "lin-ts";
    case Algorithm::lin_ucb: return "lin-ucb";
    case Algorithm::cucb: return "cucb";
  }
  return "?";
}

double regret_bound_constant(double n, double m, double d, double T, double v, double bound_D, double eta) {
  if (!(v > 0.0)) throw std::domain_error("regret bound diverges as v -> 0");
  if (!(n > 0 && m > 0 && d > 0 && T >= 1 && eta > 0 && bound_D >= 0)) {
    throw std::invalid_argument("regret bound needs positive n, m, d, eta and T >= 1");
  }
  const auto radii = exploration_radii<double>(static_cast<std::int64_t>(T), static_cast<std::int64_t>(d),
                                               static_cast<std::int64_t>(m), bound_D, v);
  const double pi = std::numbers::pi;
  const double growth = (radii.alpha + radii.beta) * n * m / eta *
                        std::sqrt(d * T * std::log1p(m * T / d) / std::numbers::ln2);
  const double constant = n * (4.0 * m * std::sqrt(pi) * std::exp(1.0 / (2.0 * v * v)) / v + pi * pi / 3.0);
  return growth + constant;
}

void write_snapshot(std::ostream& out, const LearnerSnapshot& snap) {
  char buf[40];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out << buf;
  };
  out << "t " << snap.t << '\n';
  out << "d " << snap.design.rows() << '\n';
  for (Eigen::Index i = 0; i < snap.design.rows(); ++i) {
    for (Eigen::Index j = 0; j < snap.design.cols(); ++j) {
      if (j) out << ' ';
      put(snap.design(i, j));
    }
    out << '\n';
  }
  for (Eigen::Index i = 0; i < snap.response.size(); ++i) {
    if (i) out << ' ';
    put(snap.response[i]);
  }
  out << "\nm " << snap.sigma.size() << '\n';
  for (double s : snap.sigma) {
    put(s);
    out << '\n';
  }
}

namespace {

double read_real(std::istream& in) {
  std::string tok;
  if (!(in >> tok)) throw std::runtime_error("snapshot truncated");
  char* end = nullptr;
  const double x = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size()) throw std::runtime_error("bad number in snapshot: " + tok);
  return x;
}

void expect(std::istream& in, const char* key) {
  std::string tok;
  if (!(in >> tok) || tok != key) throw std::runtime_error(std::string("snapshot: expected '") + key + "'");
}

}  // namespace

LearnerSnapshot read_snapshot(std::istream& in) {
  LearnerSnapshot snap;
  expect(in, "t");
  snap.t = static_cast<std::int64_t>(read_real(in));
  expect(in, "d");
  const auto d = static_cast<Eigen::Index>(read_real(in));
  if (d <= 0) throw std::runtime_error("snapshot: bad dimension");
  snap.design.resize(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) snap.design(i, j) = read_real(in);
  snap.response.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) snap.response[i] = read_real(in);
  expect(in, "m");
  const auto m = static_cast<std::size_t>(read_real(in));
  snap.sigma.resize(m);
  for (double& s : snap.sigma) s = read_real(in);
  return snap;
}

}  // namespace imb
