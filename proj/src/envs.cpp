#include "bounded/envs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bounded {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string format_list(const VectorXd& v) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

VectorXd to_vector(const std::vector<double>& v) { return Eigen::Map<const VectorXd>(v.data(), v.size()); }

void check_agents(std::span<const int> actions, int expected, const char* who) {
  if (static_cast<int>(actions.size()) != expected) {
    std::ostringstream os;
    os << who << ": expected " << expected << " actions, got " << actions.size();
    throw DimensionError(os.str());
  }
}

}  // namespace

// --- supply chain ----------------------------------------------------------

SupplyChainConfig SupplyChainConfig::from(const Config& s) {
  SupplyChainConfig c;
  c.retailers = s.get_int("retailers", c.retailers);
  c.capacity = s.get_double("capacity", c.capacity);
  c.demand = s.get_double("demand", c.demand);
  c.max_request = s.get_int("max_request", c.max_request);
  c.margin = s.get_double("margin", c.margin);
  c.wastage = s.get_double("wastage", c.wastage);
  c.shortage = s.get_double("shortage", c.margin);
  c.rounds = s.get_int("rounds", c.rounds);
  c.validate();
  return c;
}

void SupplyChainConfig::validate() const {
  if (retailers < 1) throw ConfigError("supply_chain.retailers must be >= 1");
  if (max_request < 2) throw ConfigError("supply_chain.max_request must be >= 2");
  if (!(capacity > 0) || !(demand > 0)) throw ConfigError("supply_chain: capacity and demand must be positive");
  if (!(demand > capacity / retailers))
    throw ConfigError("supply_chain: demand must exceed capacity / retailers (limited resources)");
  if (wastage < 0 || shortage < 0) throw ConfigError("supply_chain: costs must be non-negative");
}

SupplyChainOutcome supply_chain_step(const SupplyChainConfig& cfg, std::span<const int> requests) {
  check_agents(requests, cfg.retailers, "supply_chain_step");
  double total = 0;
  for (int x : requests) {
    if (x < 1 || x > cfg.max_request) throw std::out_of_range("supply_chain_step: request outside 1..X");
    total += x;
  }
  SupplyChainOutcome out{VectorXd(cfg.retailers), VectorXd(cfg.retailers)};
  for (int i = 0; i < cfg.retailers; ++i) {
    const double y = cfg.capacity * requests[i] / total;
    out.allocations[i] = y;
    out.utilities[i] = cfg.demand * cfg.margin - cfg.wastage * std::max(y - cfg.demand, 0.0) -
                       cfg.shortage * std::max(cfg.demand - y, 0.0);
  }
  return out;
}

SupplyChainEnv::SupplyChainEnv(SupplyChainConfig cfg) : cfg_(cfg), space_((cfg.validate(), cfg.actions())) {}

StepResult SupplyChainEnv::step(std::span<const int> actions, Rng&) {
  check_agents(actions, cfg_.retailers, "SupplyChainEnv::step");
  std::vector<int> requests(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) requests[i] = static_cast<int>(space_.value(actions[i]));
  return {supply_chain_step(cfg_, requests).utilities};
}

Config SupplyChainEnv::describe() const {
  Config c;
  c.set("env", name());
  c.set("supply_chain.retailers", std::to_string(cfg_.retailers));
  c.set("supply_chain.capacity", format_double(cfg_.capacity));
  c.set("supply_chain.demand", format_double(cfg_.demand));
  c.set("supply_chain.max_request", std::to_string(cfg_.max_request));
  c.set("supply_chain.margin", format_double(cfg_.margin));
  c.set("supply_chain.wastage", format_double(cfg_.wastage));
  c.set("supply_chain.shortage", format_double(cfg_.shortage));
  c.set("supply_chain.rounds", std::to_string(cfg_.rounds));
  return c;
}

// --- cournot ---------------------------------------------------------------

CournotConfig CournotConfig::from(const Config& s, int firms) {
  CournotConfig c;
  c.firms = s.get_int("firms", firms);
  c.A = s.get_double("A", c.A);
  c.B = s.get_double("B", c.B);
  c.q_lo = s.get_int("q_lo", c.q_lo);
  c.q_hi = s.get_int("q_hi", c.q_hi);
  c.validate();
  return c;
}

void CournotConfig::validate() const {
  if (firms < 1) throw ConfigError("cournot.firms must be >= 1");
  if (q_hi <= q_lo) throw ConfigError("cournot: need q_lo < q_hi");
  if (!(B > 0)) throw ConfigError("cournot.B must be positive");
  if (!(A > B * firms * q_lo)) throw ConfigError("cournot: A must exceed B * firms * q_lo");
}

CournotOutcome cournot_step(const CournotConfig& cfg, std::span<const int> quantities) {
  check_agents(quantities, cfg.firms, "cournot_step");
  double total = 0;
  for (int q : quantities) {
    if (q < cfg.q_lo || q > cfg.q_hi) throw std::out_of_range("cournot_step: quantity outside grid");
    total += q;
  }
  CournotOutcome out;
  const double raw = cfg.A - cfg.B * total;
  out.price_floored = raw < 0;
  out.price = std::max(raw, 0.0);
  out.utilities.resize(cfg.firms);
  for (int i = 0; i < cfg.firms; ++i) out.utilities[i] = out.price * quantities[i];
  return out;
}

CournotEnv::CournotEnv(CournotConfig cfg) : cfg_(cfg), space_((cfg.validate(), cfg.actions())) {}

StepResult CournotEnv::step(std::span<const int> actions, Rng&) {
  check_agents(actions, cfg_.firms, "CournotEnv::step");
  std::vector<int> q(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) q[i] = static_cast<int>(space_.value(actions[i]));
  const CournotOutcome o = cournot_step(cfg_, q);
  return {o.utilities, o.price, o.price_floored};
}

Config CournotEnv::describe() const {
  Config c;
  c.set("env", name());
  c.set("cournot.firms", std::to_string(cfg_.firms));
  c.set("cournot.A", format_double(cfg_.A));
  c.set("cournot.B", format_double(cfg_.B));
  c.set("cournot.q_lo", std::to_string(cfg_.q_lo));
  c.set("cournot.q_hi", std::to_string(cfg_.q_hi));
  return c;
}

// --- cobweb ----------------------------------------------------------------

CobwebConfig CobwebConfig::from(const Config& s) {
  CobwebConfig c;
  c.producers = s.get_int("producers", c.producers);
  c.a = s.get_double("a", c.a);
  c.b = s.get_double("b", c.b);
  c.psi = s.get_double("psi", c.psi);
  c.shock_std = s.get_double("shock_std", c.shock_std);
  c.grid_lo = s.get_double("grid_lo", c.grid_lo);
  c.grid_hi = s.get_double("grid_hi", c.grid_hi);
  c.grid_step = s.get_double("grid_step", c.grid_step);
  c.horizon = s.get_int("horizon", c.horizon);
  c.validate();
  return c;
}

void CobwebConfig::validate() const {
  if (producers < 1) throw ConfigError("cobweb.producers must be >= 1");
  if (!(b > 0)) throw ConfigError("cobweb.b must be positive");
  if (!(shock_std >= 0)) throw ConfigError("cobweb.shock_std must be >= 0");
  if (horizon < 1) throw ConfigError("cobweb.horizon must be >= 1");
  if (!(grid_hi > grid_lo) || !(grid_step > 0)) throw ConfigError("cobweb: bad prediction grid");
  try {
    (void)actions();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cobweb: ") + e.what());
  }
}

double cobweb_supply(const CobwebConfig& cfg, double prediction) {
  return std::tanh(cfg.psi * (prediction - cfg.producers)) + 1.0;
}

double cobweb_utility(double price, double prediction) {
  const double err = price - prediction;
  return std::max(0.0, 1300.0 - 260.0 * err * err);
}

CobwebOutcome cobweb_step(const CobwebConfig& cfg, std::span<const double> predictions, Rng& rng) {
  if (static_cast<int>(predictions.size()) != cfg.producers) throw DimensionError("cobweb_step: wrong producer count");
  double supply = 0;
  for (double p : predictions) supply += cobweb_supply(cfg, p);
  double shock = 0;
  if (cfg.shock_std > 0) shock = std::normal_distribution<double>(0.0, cfg.shock_std)(rng);
  CobwebOutcome out;
  out.price = (cfg.a - supply) / cfg.b + shock;
  out.utilities.resize(cfg.producers);
  for (int i = 0; i < cfg.producers; ++i) out.utilities[i] = cobweb_utility(out.price, predictions[i]);
  return out;
}

CobwebEnv::CobwebEnv(CobwebConfig cfg) : cfg_(cfg), space_((cfg.validate(), cfg.actions())) { reset(); }

void CobwebEnv::reset() { last_price_ = 0.5 * (cfg_.grid_lo + cfg_.grid_hi); }

VectorXd CobwebEnv::features(int) const {
  VectorXd f(1);
  f[0] = (last_price_ - cfg_.grid_lo) / (cfg_.grid_hi - cfg_.grid_lo);
  return f;
}

StepResult CobwebEnv::step(std::span<const int> actions, Rng& rng) {
  check_agents(actions, cfg_.producers, "CobwebEnv::step");
  std::vector<double> predictions(actions.size());
  for (std::size_t i = 0; i < actions.size(); ++i) predictions[i] = space_.value(actions[i]);
  const CobwebOutcome o = cobweb_step(cfg_, predictions, rng);
  last_price_ = o.price;
  return {o.utilities, o.price, false};
}

Config CobwebEnv::describe() const {
  Config c;
  c.set("env", name());
  c.set("cobweb.producers", std::to_string(cfg_.producers));
  c.set("cobweb.a", format_double(cfg_.a));
  c.set("cobweb.b", format_double(cfg_.b));
  c.set("cobweb.psi", format_double(cfg_.psi));
  c.set("cobweb.shock_std", format_double(cfg_.shock_std));
  c.set("cobweb.grid_lo", format_double(cfg_.grid_lo));
  c.set("cobweb.grid_hi", format_double(cfg_.grid_hi));
  c.set("cobweb.grid_step", format_double(cfg_.grid_step));
  c.set("cobweb.horizon", std::to_string(cfg_.horizon));
  return c;
}

// --- matrix games ----------------------------------------------------------

MatrixGame::MatrixGame(std::vector<int> action_counts, std::vector<VectorXd> payoffs, std::string name)
    : name_(std::move(name)), counts_(std::move(action_counts)), payoffs_(std::move(payoffs)) {
  if (counts_.empty()) throw std::invalid_argument("MatrixGame: need at least one player");
  int profiles = 1;
  for (int c : counts_) {
    if (c < 1) throw std::invalid_argument("MatrixGame: every player needs an action");
    profiles *= c;
  }
  if (payoffs_.size() != counts_.size()) throw DimensionError("MatrixGame: one payoff vector per player");
  for (const auto& p : payoffs_) {
    if (p.size() != profiles) throw DimensionError("MatrixGame: payoff vector has wrong length");
    if (!p.allFinite()) throw std::invalid_argument("MatrixGame: payoffs must be finite");
  }
}

MatrixGame MatrixGame::rock_paper_scissors() {
  VectorXd u0(9);
  // rows: player 0 in {R, P, S}; columns: player 1 in {R, P, S}
  u0 << 0, -1, 1,
        1, 0, -1,
        -1, 1, 0;
  return MatrixGame({3, 3}, {u0, -u0}, "rps");
}

MatrixGame MatrixGame::matching_pennies() {
  VectorXd u0(4);
  u0 << 1, -1,
        -1, 1;
  return MatrixGame({2, 2}, {u0, -u0}, "matching_pennies");
}

MatrixGame MatrixGame::prisoners_dilemma() {
  // actions {cooperate, defect}; defect is strictly dominant
  VectorXd u0(4), u1(4);
  u0 << 3, 0,
        5, 1;
  u1 << 3, 5,
        0, 1;
  return MatrixGame({2, 2}, {u0, u1}, "prisoners_dilemma");
}

MatrixGame MatrixGame::bandit(const VectorXd& utilities) {
  return MatrixGame({static_cast<int>(utilities.size())}, {utilities}, "bandit");
}

MatrixGame MatrixGame::by_name(const std::string& name) {
  if (name == "rps") return rock_paper_scissors();
  if (name == "matching_pennies") return matching_pennies();
  if (name == "prisoners_dilemma") return prisoners_dilemma();
  if (name == "bandit") {
    VectorXd u(2);
    u << 1, 0;
    return bandit(u);
  }
  throw ConfigError("unknown game '" + name + "' (expected rps, matching_pennies, prisoners_dilemma, bandit)");
}

int MatrixGame::profile_index(std::span<const int> profile) const {
  if (static_cast<int>(profile.size()) != players()) throw DimensionError("MatrixGame: profile has wrong length");
  int idx = 0;
  for (int i = 0; i < players(); ++i) {
    if (profile[i] < 0 || profile[i] >= counts_[i]) throw std::out_of_range("MatrixGame: action out of range");
    idx = idx * counts_[i] + profile[i];
  }
  return idx;
}

std::vector<int> MatrixGame::profile_at(int index) const {
  std::vector<int> profile(players());
  for (int i = players() - 1; i >= 0; --i) {
    profile[i] = index % counts_[i];
    index /= counts_[i];
  }
  return profile;
}

double MatrixGame::payoff(int player, std::span<const int> profile) const {
  return payoffs_.at(player)[profile_index(profile)];
}

VectorXd MatrixGame::expected_payoffs(int player, const std::vector<VectorXd>& strategies) const {
  if (static_cast<int>(strategies.size()) != players()) throw DimensionError("expected_payoffs: one strategy per player");
  VectorXd out = VectorXd::Zero(counts_[player]);
  for (int k = 0; k < profiles(); ++k) {
    const std::vector<int> prof = profile_at(k);
    double w = 1.0;
    for (int j = 0; j < players(); ++j)
      if (j != player) w *= strategies[j][prof[j]];
    out[prof[player]] += w * payoffs_[player][k];
  }
  return out;
}

VectorXd matrix_game_step(const MatrixGame& game, std::span<const int> profile) {
  const int k = game.profile_index(profile);
  VectorXd u(game.players());
  for (int i = 0; i < game.players(); ++i) u[i] = game.payoff(i, game.profile_at(k));
  return u;
}

MatrixGameEnv::MatrixGameEnv(MatrixGame game, std::vector<VectorXd> opponents, bool learn_all)
    : game_(std::move(game)),
      opponents_(std::move(opponents)),
      learners_(learn_all ? game_.players() : 1),
      space_(0.0, 1.0, game_.actions(0)) {
  if (learn_all) {
    if (!opponents_.empty()) throw std::invalid_argument("MatrixGameEnv: fixed opponents with learn_all");
    for (int i = 1; i < game_.players(); ++i)
      if (game_.actions(i) != game_.actions(0))
        throw DimensionError("MatrixGameEnv: shared policy needs equal action counts");
  } else {
    if (static_cast<int>(opponents_.size()) != game_.players() - 1)
      throw DimensionError("MatrixGameEnv: need one fixed strategy per opponent");
    for (int j = 0; j < static_cast<int>(opponents_.size()); ++j)
      if (opponents_[j].size() != game_.actions(j + 1) || !is_distribution(opponents_[j], 1e-9))
        throw std::invalid_argument("MatrixGameEnv: opponent strategy is not a distribution over its actions");
  }
}

StepResult MatrixGameEnv::step(std::span<const int> actions, Rng& rng) {
  check_agents(actions, learners_, "MatrixGameEnv::step");
  std::vector<int> profile(actions.begin(), actions.end());
  for (const auto& s : opponents_) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    double acc = 0;
    int pick = static_cast<int>(s.size()) - 1;
    for (int a = 0; a < s.size(); ++a) {
      acc += s[a];
      if (u < acc) {
        pick = a;
        break;
      }
    }
    profile.push_back(pick);
  }
  const VectorXd u = matrix_game_step(game_, profile);
  return {u.head(learners_)};
}

Config MatrixGameEnv::describe() const {
  Config c;
  c.set("env", game_.name());
  if (game_.name() == "bandit") {
    std::vector<int> prof(1);
    VectorXd u(game_.actions(0));
    for (int a = 0; a < u.size(); ++a) {
      prof[0] = a;
      u[a] = game_.payoff(0, prof);
    }
    c.set("bandit.payoffs", format_list(u));
  }
  if (!opponents_.empty()) c.set("matrix.opponent", format_list(opponents_.front()));
  return c;
}

// --- registry --------------------------------------------------------------

std::vector<std::string> environment_names() {
  return {"supply_chain", "cournot_duopoly", "cournot_triopoly", "cobweb", "bandit", "rps", "matching_pennies",
          "prisoners_dilemma"};
}

std::unique_ptr<Environment> make_environment(const std::string& name, const Config& o) {
  if (name == "supply_chain") return std::make_unique<SupplyChainEnv>(SupplyChainConfig::from(o.section("supply_chain.")));
  if (name == "cournot_duopoly") return std::make_unique<CournotEnv>(CournotConfig::from(o.section("cournot."), 2));
  if (name == "cournot_triopoly") return std::make_unique<CournotEnv>(CournotConfig::from(o.section("cournot."), 3));
  if (name == "cobweb") return std::make_unique<CobwebEnv>(CobwebConfig::from(o.section("cobweb.")));
  if (name == "bandit") {
    const std::vector<double> u = o.get_doubles("bandit.payoffs", {1.0, 0.0});
    if (u.size() < 2) throw ConfigError("bandit.payoffs needs at least two entries");
    return std::make_unique<MatrixGameEnv>(MatrixGame::bandit(to_vector(u)));
  }
  if (name == "rps" || name == "matching_pennies" || name == "prisoners_dilemma") {
    MatrixGame game = MatrixGame::by_name(name);
    if (o.has("matrix.opponent")) {
      const VectorXd s = to_vector(o.get_doubles("matrix.opponent", {}));
      return std::make_unique<MatrixGameEnv>(std::move(game), std::vector<VectorXd>{s});
    }
    return std::make_unique<MatrixGameEnv>(std::move(game), std::vector<VectorXd>{}, true);
  }
  std::string known;
  for (const auto& n : environment_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("unknown env '" + name + "' (expected one of: " + known + ")");
}

}  // namespace bounded
