#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "bounded/types.hpp"

namespace bounded {

/// Probability vectors must sum to one within this tolerance.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Evenly spaced ordinal action grid {lo, lo+step, ..., lo+(n-1)*step}.
class ActionSpace {
 public:
  ActionSpace(double lo, double step, int n);

  /// Integer grid lo..hi inclusive with unit step.
  static ActionSpace integer_range(int lo, int hi);
  /// Grid lo..hi inclusive with the given step; hi must lie on the grid.
  static ActionSpace from_bounds(double lo, double hi, double step);

  double lo() const { return lo_; }
  double hi() const { return lo_ + (n_ - 1) * step_; }
  double step() const { return step_; }
  int size() const { return n_; }

  double value(int index) const { return lo_ + index * step_; }
  VectorXd values() const;

  /// Index of an exact grid value, or -1 when the value is off-grid.
  int index_of(double value) const;
  /// Nearest grid index, clamped to the ends of the grid.
  int nearest_index(double value) const;

 private:
  double lo_;
  double step_;
  int n_;
};

/// A probability mass over an action grid (the prior q).
class PriorBelief {
 public:
  explicit PriorBelief(VectorXd probs);

  const VectorXd& probs() const { return probs_; }
  int size() const { return static_cast<int>(probs_.size()); }
  double operator[](int a) const { return probs_[a]; }

 private:
  VectorXd probs_;
};

/// How a supertype's prior is built from its environment's action grid.
struct PriorSpec {
  enum class Kind { kUniform, kProminent };
  Kind kind = Kind::kUniform;
  double boost = 3.0;

  static PriorSpec parse(const std::string& text);
  std::string to_string() const;
};

/// Agent template: lambda_i ~ max(0, N(mu, mu * sigma_star)).
class Supertype {
 public:
  Supertype(double mu, double sigma_star, PriorSpec prior = {}, std::string role = "agent");

  double mu() const { return mu_; }
  double sigma_star() const { return sigma_star_; }
  double sigma() const { return mu_ * sigma_star_; }
  const PriorSpec& prior() const { return prior_; }
  const std::string& role() const { return role_; }

 private:
  double mu_;
  double sigma_star_;
  PriorSpec prior_;
  std::string role_;
};

struct AgentSpec {
  int id = 0;
  double lambda = 0.0;
  PriorBelief prior;
};

double sample_lambda(const Supertype& st, Rng& rng);

PriorBelief uniform_prior(const ActionSpace& space);
PriorBelief prominent_number_prior(const ActionSpace& space, double boost = 3.0);
PriorBelief make_prior(const PriorSpec& spec, const ActionSpace& space);

inline double regularized_reward(double utility, double lambda, double penalty) {
  return utility - lambda * penalty;
}

namespace detail {
[[noreturn]] void throw_unsupported_action(Eigen::Index a);
[[noreturn]] void throw_length_mismatch(Eigen::Index n, Eigen::Index m);
}  // namespace detail

/// pi(a) log(pi(a)/q(a)), with 0 log 0 = 0. Rejects pi(a) > 0 where q(a) = 0.
template <typename Scalar>
Scalar kl_term(Scalar p, Scalar q, Eigen::Index a = -1) {
  if (p <= Scalar(0)) return Scalar(0);
  if (q <= Scalar(0)) detail::throw_unsupported_action(a);
  return p * std::log(p / q);
}

template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_contribution(const Eigen::MatrixBase<DerivedP>& pi,
                                          const Eigen::MatrixBase<DerivedQ>& q, Eigen::Index a) {
  if (pi.size() != q.size()) detail::throw_length_mismatch(pi.size(), q.size());
  if (a < 0 || a >= pi.size()) throw std::out_of_range("kl_contribution: action index out of range");
  return kl_term(pi.coeff(a), q.coeff(a), a);
}

template <typename DerivedP, typename DerivedQ>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& pi,
                                        const Eigen::MatrixBase<DerivedQ>& q) {
  using Scalar = typename DerivedP::Scalar;
  if (pi.size() != q.size()) detail::throw_length_mismatch(pi.size(), q.size());
  Scalar total(0);
  for (Eigen::Index a = 0; a < pi.size(); ++a) total += kl_term(pi.coeff(a), q.coeff(a), a);
  return total;
}

template <typename DerivedP>
typename DerivedP::Scalar kl_divergence(const Eigen::MatrixBase<DerivedP>& pi, const PriorBelief& q) {
  return kl_divergence(pi, q.probs());
}

template <typename DerivedP>
typename DerivedP::Scalar kl_contribution(const Eigen::MatrixBase<DerivedP>& pi, const PriorBelief& q,
                                          Eigen::Index a) {
  return kl_contribution(pi, q.probs(), a);
}

/// Shannon entropy in nats.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& pi) {
  using Scalar = typename Derived::Scalar;
  Scalar h(0);
  for (Eigen::Index a = 0; a < pi.size(); ++a) {
    const Scalar p = pi.coeff(a);
    if (p > Scalar(0)) h -= p * std::log(p);
  }
  return h;
}

/// Max-stabilized softmax.
template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

/// Half the L1 distance.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar tv_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) detail::throw_length_mismatch(a.size(), b.size());
  return (a - b).cwiseAbs().sum() / 2;
}

/// True when every entry is non-negative and the entries sum to 1 within tol.
template <typename Derived>
bool is_distribution(const Eigen::MatrixBase<Derived>& p, double tol = kProbabilityTolerance) {
  if (p.size() == 0) return false;
  if ((p.array() < 0).any() || !p.allFinite()) return false;
  return std::abs(static_cast<double>(p.sum()) - 1.0) <= tol;
}

}  // namespace bounded
