#pragma once

#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bounded/config.hpp"
#include "bounded/core.hpp"
#include "bounded/types.hpp"

namespace bounded {

// ---------------------------------------------------------------------------
// Supply chain: proportional allocation of a scarce good between retailers.

struct SupplyChainConfig {
  int retailers = 2;
  double capacity = 90;
  double demand = 50;
  int max_request = 100;
  double margin = 5;  // p - c
  double wastage = 2;
  double shortage = 5;
  int rounds = 30;

  static SupplyChainConfig from(const Config& section);
  void validate() const;
  ActionSpace actions() const { return ActionSpace::integer_range(1, max_request); }
};

struct SupplyChainOutcome {
  VectorXd allocations;
  VectorXd utilities;
};

/// `requests` are request sizes (not grid indices), each in 1..max_request.
SupplyChainOutcome supply_chain_step(const SupplyChainConfig& cfg, std::span<const int> requests);

// ---------------------------------------------------------------------------
// Cournot oligopoly with linear inverse demand.

struct CournotConfig {
  int firms = 2;
  double A = 2.4;
  double B = 0.04;
  int q_lo = 8;
  int q_hi = 32;

  static CournotConfig duopoly() { return {}; }
  static CournotConfig triopoly() { return {.firms = 3}; }
  static CournotConfig from(const Config& section, int firms);
  void validate() const;
  ActionSpace actions() const { return ActionSpace::integer_range(q_lo, q_hi); }
};

struct CournotOutcome {
  double price = 0;
  VectorXd utilities;
  bool price_floored = false;  // raw price A - B*sum(q) was negative
};

/// `quantities` are produced quantities (not grid indices).
CournotOutcome cournot_step(const CournotConfig& cfg, std::span<const int> quantities);

// ---------------------------------------------------------------------------
// Cobweb market with price-prediction producers.

struct CobwebConfig {
  int producers = 6;
  double a = 13.8;
  double b = 1.5;
  double psi = 2;
  double shock_std = 0.5;
  double grid_lo = 0;
  double grid_hi = 10;
  double grid_step = 0.1;
  int horizon = 50;

  static CobwebConfig from(const Config& section);
  void validate() const;
  ActionSpace actions() const { return ActionSpace::from_bounds(grid_lo, grid_hi, grid_step); }
};

/// Supply of one producer given its price prediction; the curve is centred on the producer count.
double cobweb_supply(const CobwebConfig& cfg, double prediction);
double cobweb_utility(double price, double prediction);

struct CobwebOutcome {
  double price = 0;
  VectorXd utilities;
};

CobwebOutcome cobweb_step(const CobwebConfig& cfg, std::span<const double> predictions, Rng& rng);

// ---------------------------------------------------------------------------
// Normal-form games.

class MatrixGame {
 public:
  /// payoffs[i] holds player i's payoff for every action profile, row-major
  /// over players (the last player's action varies fastest).
  MatrixGame(std::vector<int> action_counts, std::vector<VectorXd> payoffs, std::string name = "matrix");

  static MatrixGame rock_paper_scissors();
  static MatrixGame matching_pennies();
  static MatrixGame prisoners_dilemma();
  /// Single player against nature.
  static MatrixGame bandit(const VectorXd& utilities);
  static MatrixGame by_name(const std::string& name);

  const std::string& name() const { return name_; }
  int players() const { return static_cast<int>(counts_.size()); }
  int actions(int player) const { return counts_[player]; }
  int profiles() const { return static_cast<int>(payoffs_.front().size()); }

  int profile_index(std::span<const int> profile) const;
  std::vector<int> profile_at(int index) const;
  double payoff(int player, std::span<const int> profile) const;

  /// Expected payoff of each of `player`'s actions when the others play `strategies`.
  VectorXd expected_payoffs(int player, const std::vector<VectorXd>& strategies) const;

 private:
  std::string name_;
  std::vector<int> counts_;
  std::vector<VectorXd> payoffs_;
};

VectorXd matrix_game_step(const MatrixGame& game, std::span<const int> profile);

// ---------------------------------------------------------------------------
// Environments seen by the learner. Actions passed to `step` are grid indices.

struct StepResult {
  VectorXd utilities;
  double price = std::numeric_limits<double>::quiet_NaN();
  bool price_floored = false;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::string role() const = 0;
  virtual int num_agents() const = 0;
  virtual const ActionSpace& action_space() const = 0;
  virtual int horizon() const { return 1; }
  virtual int feature_size() const { return 0; }

  virtual void reset() {}
  virtual VectorXd features(int /*agent*/) const { return VectorXd(0); }
  virtual StepResult step(std::span<const int> actions, Rng& rng) = 0;

  /// Cobweb calibrates on realized prices; the other games on decisions.
  virtual bool records_price() const { return false; }
  /// Grid used for calibration histograms.
  virtual ActionSpace record_grid() const { return action_space(); }

  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Key/value description sufficient to rebuild this environment with make_environment.
  virtual Config describe() const = 0;
};

class SupplyChainEnv final : public Environment {
 public:
  explicit SupplyChainEnv(SupplyChainConfig cfg = {});
  std::string name() const override { return "supply_chain"; }
  std::string role() const override { return "retailer"; }
  int num_agents() const override { return cfg_.retailers; }
  const ActionSpace& action_space() const override { return space_; }
  StepResult step(std::span<const int> actions, Rng& rng) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<SupplyChainEnv>(*this); }
  Config describe() const override;
  const SupplyChainConfig& config() const { return cfg_; }

 private:
  SupplyChainConfig cfg_;
  ActionSpace space_;
};

class CournotEnv final : public Environment {
 public:
  explicit CournotEnv(CournotConfig cfg = {});
  std::string name() const override { return cfg_.firms == 3 ? "cournot_triopoly" : "cournot_duopoly"; }
  std::string role() const override { return "firm"; }
  int num_agents() const override { return cfg_.firms; }
  const ActionSpace& action_space() const override { return space_; }
  StepResult step(std::span<const int> actions, Rng& rng) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<CournotEnv>(*this); }
  Config describe() const override;
  const CournotConfig& config() const { return cfg_; }

 private:
  CournotConfig cfg_;
  ActionSpace space_;
};

/// Repeated cobweb market; each agent observes the last realized price.
class CobwebEnv final : public Environment {
 public:
  explicit CobwebEnv(CobwebConfig cfg = {});
  std::string name() const override { return "cobweb"; }
  std::string role() const override { return "producer"; }
  int num_agents() const override { return cfg_.producers; }
  const ActionSpace& action_space() const override { return space_; }
  int horizon() const override { return cfg_.horizon; }
  int feature_size() const override { return 1; }
  void reset() override;
  VectorXd features(int agent) const override;
  StepResult step(std::span<const int> actions, Rng& rng) override;
  bool records_price() const override { return true; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<CobwebEnv>(*this); }
  Config describe() const override;
  const CobwebConfig& config() const { return cfg_; }
  double last_price() const { return last_price_; }

 private:
  CobwebConfig cfg_;
  ActionSpace space_;
  double last_price_;
};

/// Matrix game where player 0 learns and every other player samples from a fixed mixed strategy.
class MatrixGameEnv final : public Environment {
 public:
  /// `opponents[j]` is the fixed strategy of player j+1. When `learn_all` is true, every player
  /// is a learning agent (all players must then have the same action count).
  MatrixGameEnv(MatrixGame game, std::vector<VectorXd> opponents = {}, bool learn_all = false);

  std::string name() const override { return game_.name(); }
  std::string role() const override { return "player"; }
  int num_agents() const override { return learners_; }
  const ActionSpace& action_space() const override { return space_; }
  StepResult step(std::span<const int> actions, Rng& rng) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MatrixGameEnv>(*this); }
  Config describe() const override;
  const MatrixGame& game() const { return game_; }
  const std::vector<VectorXd>& opponents() const { return opponents_; }

 private:
  MatrixGame game_;
  std::vector<VectorXd> opponents_;
  int learners_;
  ActionSpace space_;
};

/// Names accepted by make_environment.
std::vector<std::string> environment_names();

/// Builds an environment from its name and optional overrides, e.g. `cournot.A`,
/// `supply_chain.capacity`, `cobweb.shock_std`, `bandit.payoffs`.
std::unique_ptr<Environment> make_environment(const std::string& name, const Config& overrides = {});

}  // namespace bounded
