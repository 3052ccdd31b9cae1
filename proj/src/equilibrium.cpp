#include "bounded/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bounded/core.hpp"

namespace bounded {

VectorXd quantal_response(const VectorXd& expected_payoffs, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("quantal_response: lambda must be positive (use best_response)");
  return softmax(VectorXd(expected_payoffs / lambda));
}

namespace {

std::vector<VectorXd> respond(const MatrixGame& game, double lambda, const std::vector<VectorXd>& s) {
  std::vector<VectorXd> out(s.size());
  for (int i = 0; i < game.players(); ++i) out[i] = quantal_response(game.expected_payoffs(i, s), lambda);
  return out;
}

double max_norm(const std::vector<VectorXd>& a, const std::vector<VectorXd>& b) {
  double r = 0;
  for (std::size_t i = 0; i < a.size(); ++i) r = std::max(r, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return r;
}

}  // namespace

double qre_residual(const MatrixGame& game, double lambda, const std::vector<VectorXd>& strategies) {
  return max_norm(respond(game, lambda, strategies), strategies);
}

QreSolution logit_qre(const MatrixGame& game, double lambda, const QreOptions& opts) {
  if (!(lambda > 0)) throw std::invalid_argument("logit_qre: lambda must be positive (use best_response for lambda = 0)");
  if (!(opts.damping > 0 && opts.damping <= 1)) throw std::invalid_argument("logit_qre: damping must be in (0, 1]");
  QreSolution sol;
  sol.lambda = lambda;
  for (int i = 0; i < game.players(); ++i)
    sol.strategies.push_back(VectorXd::Constant(game.actions(i), 1.0 / game.actions(i)));
  for (int it = 1; it <= opts.max_iter; ++it) {
    const std::vector<VectorXd> qr = respond(game, lambda, sol.strategies);
    sol.residual = max_norm(qr, sol.strategies);
    sol.iterations = it;
    if (sol.residual < opts.tol) return sol;
    for (std::size_t i = 0; i < qr.size(); ++i)
      sol.strategies[i] = (1.0 - opts.damping) * sol.strategies[i] + opts.damping * qr[i];
  }
  std::ostringstream os;
  os << "logit_qre did not converge after " << opts.max_iter << " iterations (residual " << sol.residual << ")";
  throw ConvergenceError(os.str());
}

BestResponse best_response(const MatrixGame& game, int player, const std::vector<VectorXd>& strategies, double tol) {
  std::vector<VectorXd> s = strategies;
  if (player < 0 || player >= game.players()) throw std::out_of_range("best_response: bad player");
  if (static_cast<int>(s.size()) != game.players()) throw DimensionError("best_response: one strategy per player");
  s[player] = VectorXd::Constant(game.actions(player), 1.0 / game.actions(player));
  for (int j = 0; j < game.players(); ++j)
    if (j != player && (s[j].size() != game.actions(j) || !is_distribution(s[j], 1e-9)))
      throw std::invalid_argument("best_response: opponent strategy is not a distribution");
  BestResponse br;
  br.expected_payoffs = game.expected_payoffs(player, s);
  const double best = br.expected_payoffs.maxCoeff();
  for (int a = 0; a < br.expected_payoffs.size(); ++a)
    if (br.expected_payoffs[a] >= best - tol) br.maximizers.push_back(a);
  br.action = br.maximizers.front();
  return br;
}

double cournot_profit(const CournotConfig& cfg, int own, int rival) {
  std::vector<int> q(cfg.firms, rival);
  q[0] = own;
  return cournot_step(cfg, q).utilities[0];
}

std::vector<int> cournot_best_responses(const CournotConfig& cfg, int rival) {
  double best = -std::numeric_limits<double>::infinity();
  for (int q = cfg.q_lo; q <= cfg.q_hi; ++q) best = std::max(best, cournot_profit(cfg, q, rival));
  std::vector<int> out;
  for (int q = cfg.q_lo; q <= cfg.q_hi; ++q)
    if (cournot_profit(cfg, q, rival) >= best - 1e-9) out.push_back(q);
  return out;
}

int cournot_nash(const CournotConfig& cfg) {
  cfg.validate();
  std::vector<int> strict, weak;
  for (int q = cfg.q_lo; q <= cfg.q_hi; ++q) {
    const auto br = cournot_best_responses(cfg, q);
    if (br.size() == 1 && br[0] == q) strict.push_back(q);
    if (std::find(br.begin(), br.end(), q) != br.end()) weak.push_back(q);
  }
  // weak points include profiles where rivals alone push the price to the floor and every quantity earns 0
  const std::vector<int>& fixed_points = strict.empty() ? weak : strict;
  if (fixed_points.empty()) throw ConvergenceError("cournot_nash: no symmetric pure equilibrium on the grid");
  if (fixed_points.size() > 1) {
    std::ostringstream os;
    os << "cournot_nash: " << fixed_points.size() << " symmetric equilibria on the grid";
    throw ConvergenceError(os.str());
  }
  return fixed_points.front();
}

int supply_chain_nash(const SupplyChainConfig& cfg) {
  if (!(cfg.capacity < cfg.retailers * cfg.demand))
    throw ConfigError("supply_chain_nash: capacity is not limited (need K < I * D)");
  return cfg.max_request;
}

double cobweb_excess_demand(const CobwebConfig& cfg, double price) {
  return cfg.a - cfg.b * price - cfg.producers * cobweb_supply(cfg, price);
}

double cobweb_rational_price(const CobwebConfig& cfg, double tol) {
  double lo = cfg.grid_lo;
  double hi = cfg.grid_hi;
  double flo = cobweb_excess_demand(cfg, lo);
  const double fhi = cobweb_excess_demand(cfg, hi);
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) throw ConvergenceError("cobweb_rational_price: no sign change on the price grid");
  // the excess demand is strictly decreasing, so bisection brackets the unique root
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = cobweb_excess_demand(cfg, mid);
    if (std::abs(fm) < tol || hi - lo < 1e-15) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace bounded
