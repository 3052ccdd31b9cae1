#pragma once

#include <vector>

#include "bounded/envs.hpp"
#include "bounded/types.hpp"

namespace bounded {

struct QreOptions {
  double tol = 1e-10;
  int max_iter = 100000;
  double damping = 0.5;  // weight on the new quantal response
};

struct QreSolution {
  std::vector<VectorXd> strategies;
  double lambda = 0;
  int iterations = 0;
  double residual = 0;  // max-norm distance between the strategies and their quantal response
};

/// Logit quantal response: softmax(expected payoff / lambda), max-stabilized.
VectorXd quantal_response(const VectorXd& expected_payoffs, double lambda);

/// Damped fixed-point iteration from uniform strategies. Throws ConvergenceError
/// (carrying the residual in its message) when max_iter is exhausted.
QreSolution logit_qre(const MatrixGame& game, double lambda, const QreOptions& opts = {});

/// Max-norm displacement of the logit response map at `strategies`.
double qre_residual(const MatrixGame& game, double lambda, const std::vector<VectorXd>& strategies);

struct BestResponse {
  int action = 0;               // lowest index among the maximizers
  std::vector<int> maximizers;  // size > 1 means a tie
  VectorXd expected_payoffs;

  bool tie() const { return maximizers.size() > 1; }
};

/// Pure best response of `player` when every player plays `strategies` (the entry for
/// `player` itself is ignored). Payoffs within `tol` of the maximum count as tied.
BestResponse best_response(const MatrixGame& game, int player, const std::vector<VectorXd>& strategies,
                           double tol = 1e-12);

/// Profit of one firm producing `own` while each rival produces `rival`.
double cournot_profit(const CournotConfig& cfg, int own, int rival);
/// Grid best responses (ties within 1e-9 all returned) of one firm when every rival produces `rival`.
std::vector<int> cournot_best_responses(const CournotConfig& cfg, int rival);
/// Symmetric Nash quantity: the grid quantity that is its own unique best response. Weak fixed points
/// (ties, e.g. when rivals alone drive the price to zero) are used only if no strict one exists.
int cournot_nash(const CournotConfig& cfg);

/// Nash request under limited capacity: every retailer asks for the maximum.
int supply_chain_nash(const SupplyChainConfig& cfg);

/// Rational-expectations price: root of a - b p = producers * S(p) on the prediction grid range.
double cobweb_rational_price(const CobwebConfig& cfg, double tol = 1e-10);
/// a - b p - producers * S(p).
double cobweb_excess_demand(const CobwebConfig& cfg, double price);

}  // namespace bounded
