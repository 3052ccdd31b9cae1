#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bounded/config.hpp"
#include "bounded/core.hpp"
#include "bounded/envs.hpp"
#include "bounded/policy.hpp"
#include "bounded/types.hpp"

namespace bounded {

/// How the information cost of a step is charged.
///   kExact:     D_KL(pi(.|s) || q) of the whole conditional distribution.
///   kPerAction: pi(a_t) log(pi(a_t) / q(a_t)) for the sampled action only.
///   kNone:      no cost (plain PPO on raw utility).
enum class KlMode { kExact, kPerAction, kNone };

KlMode parse_kl_mode(const std::string& text);
std::string to_string(KlMode mode);

struct TrainingConfig {
  int iterations = 500;
  int episodes_per_iteration = 256;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_epsilon = 0.2;
  double learning_rate = 3e-3;
  double value_learning_rate = 3e-3;
  bool anneal_learning_rate = true;  // linear decay to zero over the run
  int minibatch_epochs = 4;
  int minibatch_size = 256;
  double max_grad_norm = 0.5;
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 0;
  KlMode kl_mode = KlMode::kExact;

  /// 500 iterations.
  static TrainingConfig full_profile(const Environment& env);
  /// 150 iterations with per-environment batch sizes; used in CI.
  static TrainingConfig desk_profile(const Environment& env);
  /// Profile chosen by `profile` (desk|full, default desk), then overridden by individual keys.
  static TrainingConfig from(const Config& cfg, const Environment& env);

  void validate() const;
  Config describe() const;
};

/// A population of agents: one supertype shared by every agent, or one per agent.
using Population = std::vector<Supertype>;

const Supertype& supertype_for(const Population& pop, int agent);

struct Transition {
  VectorXd obs;
  int action = 0;
  double lambda = 0;
  double raw_utility = 0;
  double kl_penalty = 0;
  double regularized_reward = 0;
  double log_prob = 0;  // at collection time
  double price = 0;     // NaN when the environment has no price
  int episode = 0;
  int step = 0;
  int agent = 0;
  bool terminal = false;  // last step of this agent's trajectory
};

/// Transitions ordered by (episode, agent, step): every agent trajectory is contiguous.
struct RolloutBatch {
  ObservationLayout layout;
  std::vector<Transition> transitions;
  int episodes = 0;
  int floored_prices = 0;  // Cournot steps whose raw price was negative

  std::size_t size() const { return transitions.size(); }
  MatrixXd observations() const;
};

/// Runs `episodes` episodes of the frozen policy. Each agent draws a fresh lambda per episode.
RolloutBatch collect_episodes(const Environment& env, const PolicyParameters& params, const Population& pop,
                              int episodes, KlMode mode, Rng& rng);

RolloutBatch collect_rollouts(const Environment& env, const PolicyParameters& params, const Population& pop,
                              const TrainingConfig& cfg, Rng& rng);

struct AdvantageEstimates {
  VectorXd advantages;  // normalized to zero mean, unit variance (all zero if the batch has no spread)
  VectorXd returns;     // critic regression targets
  double scale = 1;     // standard deviation used for normalization (1 when degenerate)
};

AdvantageEstimates compute_advantages(const RolloutBatch& batch, double gamma, double gae_lambda,
                                      const ValueParameters& value);

/// Adam with bias correction.
struct Adam {
  VectorXd m;
  VectorXd v;
  long long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void step(VectorXd& params, const VectorXd& grad, double lr);
};

struct LearnerState {
  PolicyParameters policy;
  ValueParameters value;
  Adam policy_opt;
  Adam value_opt;
};

LearnerState init_learner(const Environment& env, const TrainingConfig& cfg, Rng& rng);

/// Clipped-surrogate update. In exact mode the gradient of lambda * D_KL(pi || q) at each
/// visited state is added to the surrogate, scaled by the same factor as the advantages,
/// so the stationary point is the regularized optimum.
LearnerState ppo_update(const LearnerState& state, const RolloutBatch& batch, const AdvantageEstimates& adv,
                        const TrainingConfig& cfg, Rng& rng, double lr_scale = 1.0);

struct CurvePoint {
  int iteration = 0;
  double mean_raw_utility = 0;
  double mean_kl_penalty = 0;
  double mean_regularized_reward = 0;
};

struct TrainingResult {
  PolicyParameters policy;
  ValueParameters value;
  std::vector<CurvePoint> curve;
};

using ProgressCallback = std::function<void(const CurvePoint&)>;

TrainingResult train(const Environment& env, const Population& pop, const TrainingConfig& cfg,
                     const ProgressCallback& progress = {});

/// Observation for agent `i` under the given lambda and prior with the environment's current features.
VectorXd agent_observation(const Environment& env, int i, double lambda, const PriorBelief& q);

/// Conditional action distribution of agent `i` at the environment's current state.
ActionDistribution policy_distribution(const PolicyParameters& params, const Environment& env, int i, double lambda,
                                       const PriorBelief& q);

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve);

}  // namespace bounded
