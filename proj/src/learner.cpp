#include "bounded/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace bounded {

KlMode parse_kl_mode(const std::string& text) {
  if (text == "exact") return KlMode::kExact;
  if (text == "per_action") return KlMode::kPerAction;
  if (text == "none") return KlMode::kNone;
  throw ConfigError("kl_mode: expected exact, per_action or none, got '" + text + "'");
}

std::string to_string(KlMode mode) {
  switch (mode) {
    case KlMode::kExact:
      return "exact";
    case KlMode::kPerAction:
      return "per_action";
    case KlMode::kNone:
      return "none";
  }
  return "exact";
}

TrainingConfig TrainingConfig::full_profile(const Environment& env) {
  TrainingConfig c = desk_profile(env);
  c.iterations = 500;
  return c;
}

TrainingConfig TrainingConfig::desk_profile(const Environment& env) {
  TrainingConfig c;
  c.iterations = 150;
  const int per_episode = env.num_agents() * env.horizon();
  // roughly 256 transitions per iteration for one-step games, 2400 for the cobweb market
  c.episodes_per_iteration = std::max(1, (env.horizon() > 1 ? 2400 : 256) / per_episode);
  c.minibatch_size = env.horizon() > 1 ? 600 : 128;
  return c;
}

TrainingConfig TrainingConfig::from(const Config& cfg, const Environment& env) {
  const std::string profile = cfg.get("profile", "desk");
  TrainingConfig c;
  if (profile == "desk") {
    c = desk_profile(env);
  } else if (profile == "full") {
    c = full_profile(env);
  } else {
    throw ConfigError("profile: expected desk or full, got '" + profile + "'");
  }
  c.iterations = cfg.get_int("iterations", c.iterations);
  c.episodes_per_iteration = cfg.get_int("episodes_per_iteration", c.episodes_per_iteration);
  c.gamma = cfg.get_double("gamma", c.gamma);
  c.gae_lambda = cfg.get_double("gae_lambda", c.gae_lambda);
  c.clip_epsilon = cfg.get_double("clip_epsilon", c.clip_epsilon);
  c.learning_rate = cfg.get_double("learning_rate", c.learning_rate);
  c.value_learning_rate = cfg.get_double("value_learning_rate", c.value_learning_rate);
  c.anneal_learning_rate = cfg.get_bool("anneal_learning_rate", c.anneal_learning_rate);
  c.minibatch_epochs = cfg.get_int("minibatch_epochs", c.minibatch_epochs);
  c.minibatch_size = cfg.get_int("minibatch_size", c.minibatch_size);
  c.max_grad_norm = cfg.get_double("max_grad_norm", c.max_grad_norm);
  if (cfg.has("hidden")) {
    c.hidden.clear();
    for (double w : cfg.get_doubles("hidden", {})) c.hidden.push_back(static_cast<int>(w));
  }
  c.seed = cfg.get_u64("seed", c.seed);
  c.kl_mode = parse_kl_mode(cfg.get("kl_mode", to_string(c.kl_mode)));
  c.validate();
  return c;
}

void TrainingConfig::validate() const {
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (episodes_per_iteration < 1) throw ConfigError("episodes_per_iteration must be >= 1");
  if (!(gamma >= 0 && gamma <= 1)) throw ConfigError("gamma must be in [0, 1]");
  if (!(gae_lambda >= 0 && gae_lambda <= 1)) throw ConfigError("gae_lambda must be in [0, 1]");
  if (!(clip_epsilon > 0)) throw ConfigError("clip_epsilon must be positive");
  if (!(learning_rate > 0) || !(value_learning_rate > 0)) throw ConfigError("learning rates must be positive");
  if (minibatch_epochs < 1 || minibatch_size < 1) throw ConfigError("minibatch settings must be >= 1");
  if (!(max_grad_norm > 0)) throw ConfigError("max_grad_norm must be positive");
  for (int w : hidden)
    if (w < 1) throw ConfigError("hidden layer widths must be >= 1");
}

Config TrainingConfig::describe() const {
  Config c;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  c.set("iterations", std::to_string(iterations));
  c.set("episodes_per_iteration", std::to_string(episodes_per_iteration));
  c.set("gamma", num(gamma));
  c.set("gae_lambda", num(gae_lambda));
  c.set("clip_epsilon", num(clip_epsilon));
  c.set("learning_rate", num(learning_rate));
  c.set("value_learning_rate", num(value_learning_rate));
  c.set("anneal_learning_rate", anneal_learning_rate ? "true" : "false");
  c.set("minibatch_epochs", std::to_string(minibatch_epochs));
  c.set("minibatch_size", std::to_string(minibatch_size));
  c.set("max_grad_norm", num(max_grad_norm));
  std::string h;
  for (int w : hidden) h += (h.empty() ? "" : ",") + std::to_string(w);
  c.set("hidden", h);
  c.set("seed", std::to_string(seed));
  c.set("kl_mode", to_string(kl_mode));
  return c;
}

const Supertype& supertype_for(const Population& pop, int agent) {
  if (pop.empty()) throw ConfigError("population has no supertype");
  if (pop.size() == 1) return pop.front();
  if (agent < 0 || agent >= static_cast<int>(pop.size()))
    throw DimensionError("population: no supertype for agent " + std::to_string(agent));
  return pop[agent];
}

MatrixXd RolloutBatch::observations() const {
  MatrixXd x(layout.size(), static_cast<Eigen::Index>(transitions.size()));
  for (std::size_t j = 0; j < transitions.size(); ++j) x.col(j) = transitions[j].obs;
  return x;
}

VectorXd agent_observation(const Environment& env, int i, double lambda, const PriorBelief& q) {
  return encode_observation(env.features(i), i, env.num_agents(), lambda, q);
}

ActionDistribution policy_distribution(const PolicyParameters& params, const Environment& env, int i, double lambda,
                                       const PriorBelief& q) {
  return forward(params, agent_observation(env, i, lambda, q));
}

namespace {

void check_dimensions(const Environment& env, const PolicyParameters& params, const ObservationLayout& layout) {
  if (params.inputs() != layout.size() || params.outputs() != env.action_space().size()) {
    std::ostringstream os;
    os << "policy expects " << params.inputs() << " inputs and " << params.outputs() << " actions; environment "
       << env.name() << " provides " << layout.size() << " inputs and " << env.action_space().size() << " actions";
    throw DimensionError(os.str());
  }
}

double step_penalty(KlMode mode, const VectorXd& pi, const VectorXd& q, int a) {
  switch (mode) {
    case KlMode::kExact:
      return kl_divergence(pi, q);
    case KlMode::kPerAction:
      return kl_contribution(pi, q, a);
    case KlMode::kNone:
      return 0.0;
  }
  return 0.0;
}

}  // namespace

RolloutBatch collect_episodes(const Environment& env, const PolicyParameters& params, const Population& pop,
                              int episodes, KlMode mode, Rng& rng) {
  const int n = env.num_agents();
  const int horizon = env.horizon();
  const ActionSpace& space = env.action_space();
  RolloutBatch batch;
  batch.layout = ObservationLayout{env.feature_size(), space.size()};
  batch.episodes = episodes;
  check_dimensions(env, params, batch.layout);
  params.check_finite();

  std::vector<PriorBelief> priors;
  for (int i = 0; i < n; ++i) priors.push_back(make_prior(supertype_for(pop, i).prior(), space));

  // all episodes run in lockstep so each step is one batched forward pass
  std::vector<std::unique_ptr<Environment>> envs;
  std::vector<double> lambdas(static_cast<std::size_t>(episodes) * n);
  for (int e = 0; e < episodes; ++e) {
    envs.push_back(env.clone());
    envs.back()->reset();
    for (int i = 0; i < n; ++i) lambdas[e * n + i] = sample_lambda(supertype_for(pop, i), rng);
  }

  const std::size_t total = static_cast<std::size_t>(episodes) * n * horizon;
  batch.transitions.resize(total);
  auto slot = [&](int e, int i, int t) -> Transition& {
    return batch.transitions[(static_cast<std::size_t>(e) * n + i) * horizon + t];
  };

  MatrixXd obs(batch.layout.size(), static_cast<Eigen::Index>(episodes) * n);
  std::vector<int> actions(n);
  for (int t = 0; t < horizon; ++t) {
    for (int e = 0; e < episodes; ++e)
      for (int i = 0; i < n; ++i) obs.col(e * n + i) = agent_observation(*envs[e], i, lambdas[e * n + i], priors[i]);
    const MatrixXd probs = softmax_columns(params.forward(obs));
    for (int e = 0; e < episodes; ++e) {
      for (int i = 0; i < n; ++i) {
        const int col = e * n + i;
        const VectorXd pi = probs.col(col);
        const int a = sample_action(pi, rng);
        actions[i] = a;
        Transition& tr = slot(e, i, t);
        tr.obs = obs.col(col);
        tr.action = a;
        tr.lambda = lambdas[col];
        tr.kl_penalty = step_penalty(mode, pi, priors[i].probs(), a);
        tr.log_prob = std::log(pi[a]);
        tr.episode = e;
        tr.step = t;
        tr.agent = i;
        tr.terminal = (t + 1 == horizon);
      }
      const StepResult res = envs[e]->step(actions, rng);
      if (res.price_floored) ++batch.floored_prices;
      for (int i = 0; i < n; ++i) {
        Transition& tr = slot(e, i, t);
        tr.raw_utility = res.utilities[i];
        tr.price = res.price;
        tr.regularized_reward = regularized_reward(tr.raw_utility, tr.lambda, tr.kl_penalty);
      }
    }
  }
  return batch;
}

RolloutBatch collect_rollouts(const Environment& env, const PolicyParameters& params, const Population& pop,
                              const TrainingConfig& cfg, Rng& rng) {
  return collect_episodes(env, params, pop, cfg.episodes_per_iteration, cfg.kl_mode, rng);
}

AdvantageEstimates compute_advantages(const RolloutBatch& batch, double gamma, double gae_lambda,
                                      const ValueParameters& value) {
  const Eigen::Index m = static_cast<Eigen::Index>(batch.size());
  AdvantageEstimates out;
  out.advantages = VectorXd::Zero(m);
  out.returns = VectorXd::Zero(m);
  if (m == 0) return out;
  const VectorXd v = value.forward(batch.observations()).row(0).transpose();
  double next_adv = 0;
  for (Eigen::Index j = m - 1; j >= 0; --j) {
    const Transition& tr = batch.transitions[j];
    const double next_value = tr.terminal ? 0.0 : v[j + 1];
    if (tr.terminal) next_adv = 0;
    const double delta = tr.regularized_reward + gamma * next_value - v[j];
    next_adv = delta + gamma * gae_lambda * next_adv;
    out.advantages[j] = next_adv;
  }
  out.returns = out.advantages + v;
  const double mean = out.advantages.mean();
  const double sd = std::sqrt((out.advantages.array() - mean).square().mean());
  if (sd > 1e-8) {
    out.advantages = (out.advantages.array() - mean) / sd;
    out.scale = sd;
  } else {
    out.advantages.setZero();
    out.scale = 1;
  }
  return out;
}

void Adam::step(VectorXd& params, const VectorXd& grad, double lr) {
  if (m.size() != params.size()) {
    m = VectorXd::Zero(params.size());
    v = VectorXd::Zero(params.size());
  }
  ++t;
  m = beta1 * m + (1 - beta1) * grad;
  v = beta2 * v + (1 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1 - std::pow(beta1, static_cast<double>(t));
  const double c2 = 1 - std::pow(beta2, static_cast<double>(t));
  params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

LearnerState init_learner(const Environment& env, const TrainingConfig& cfg, Rng& rng) {
  const ObservationLayout layout{env.feature_size(), env.action_space().size()};
  LearnerState s;
  s.policy = init_policy(layout.size(), layout.actions, rng, cfg.hidden);
  s.value = init_value(layout.size(), rng, cfg.hidden);
  return s;
}

namespace {

void clip_norm(VectorXd& g, double max_norm) {
  const double n = g.norm();
  if (n > max_norm) g *= max_norm / n;
}

}  // namespace

LearnerState ppo_update(const LearnerState& state, const RolloutBatch& batch, const AdvantageEstimates& adv,
                        const TrainingConfig& cfg, Rng& rng, double lr_scale) {
  const Eigen::Index m = static_cast<Eigen::Index>(batch.size());
  if (m == 0) throw std::invalid_argument("ppo_update: empty batch");
  if (adv.advantages.size() != m || adv.returns.size() != m)
    throw DimensionError("ppo_update: advantage estimates do not match the batch");
  LearnerState next = state;
  const ObservationLayout& layout = batch.layout;
  const int n_actions = layout.actions;
  const double eps = cfg.clip_epsilon;
  const bool exact = cfg.kl_mode == KlMode::kExact;
  const MatrixXd all_obs = batch.observations();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const Eigen::Index mb = std::min<Eigen::Index>(cfg.minibatch_size, m);

  for (int epoch = 0; epoch < cfg.minibatch_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index start = 0; start < m; start += mb) {
      const Eigen::Index len = std::min(mb, m - start);
      MatrixXd x(all_obs.rows(), len);
      for (Eigen::Index k = 0; k < len; ++k) x.col(k) = all_obs.col(order[start + k]);

      // policy
      Network::Tape tape;
      const MatrixXd logits = next.policy.forward(x, tape);
      const MatrixXd probs = softmax_columns(logits);
      MatrixXd g_logits = MatrixXd::Zero(n_actions, len);
      double loss = 0;
      for (Eigen::Index k = 0; k < len; ++k) {
        const Eigen::Index j = order[start + k];
        const Transition& tr = batch.transitions[j];
        const double a_hat = adv.advantages[j];
        const double p_a = probs(tr.action, k);
        const double ratio = std::exp(std::log(p_a) - tr.log_prob);
        const double unclipped = ratio * a_hat;
        const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * a_hat;
        loss -= std::min(unclipped, clipped) / len;
        if (unclipped <= clipped) {
          // d(-ratio * A)/dz = -ratio * A * (e_a - pi)
          g_logits.col(k) = (ratio * a_hat / len) * probs.col(k);
          g_logits(tr.action, k) -= ratio * a_hat / len;
        }
        if (exact && tr.lambda > 0) {
          const VectorXd q = x.col(k).segment(layout.prior_offset(), n_actions);
          const VectorXd pi = probs.col(k);
          const double kl = kl_divergence(pi, q);
          const double coef = tr.lambda / adv.scale / len;
          loss += coef * kl;
          // d KL(softmax(z) || q) / dz_i = pi_i (log(pi_i / q_i) - KL)
          g_logits.col(k).array() += coef * pi.array() * ((pi.array() / q.array()).log() - kl);
        }
      }
      if (!std::isfinite(loss) || !g_logits.allFinite()) {
        std::ostringstream os;
        os << "ppo_update: non-finite policy loss (epoch " << epoch << ", minibatch at " << start << ", loss " << loss
           << ", advantage scale " << adv.scale << ")";
        throw ConvergenceError(os.str());
      }
      VectorXd grad = next.policy.backward(tape, g_logits);
      clip_norm(grad, cfg.max_grad_norm);
      next.policy_opt.step(next.policy.parameters(), grad, cfg.learning_rate * lr_scale);

      // critic
      Network::Tape vtape;
      const MatrixXd values = next.value.forward(x, vtape);
      MatrixXd g_values(1, len);
      double vloss = 0;
      for (Eigen::Index k = 0; k < len; ++k) {
        const double err = values(0, k) - adv.returns[order[start + k]];
        vloss += 0.5 * err * err / len;
        g_values(0, k) = err / len;
      }
      if (!std::isfinite(vloss)) {
        std::ostringstream os;
        os << "ppo_update: non-finite value loss (epoch " << epoch << ", minibatch at " << start << ")";
        throw ConvergenceError(os.str());
      }
      VectorXd vgrad = next.value.backward(vtape, g_values);
      clip_norm(vgrad, cfg.max_grad_norm);
      next.value_opt.step(next.value.parameters(), vgrad, cfg.value_learning_rate * lr_scale);
    }
  }
  next.policy.check_finite();
  next.value.check_finite();
  return next;
}

TrainingResult train(const Environment& env, const Population& pop, const TrainingConfig& cfg,
                     const ProgressCallback& progress) {
  cfg.validate();
  Rng init_rng(derive_seed(cfg.seed, 1));
  Rng rollout_rng(derive_seed(cfg.seed, 2));
  Rng update_rng(derive_seed(cfg.seed, 3));
  LearnerState state = init_learner(env, cfg, init_rng);
  TrainingResult result;
  for (int it = 0; it < cfg.iterations; ++it) {
    const RolloutBatch batch = collect_rollouts(env, state.policy, pop, cfg, rollout_rng);
    CurvePoint pt;
    pt.iteration = it;
    for (const Transition& tr : batch.transitions) {
      pt.mean_raw_utility += tr.raw_utility;
      pt.mean_kl_penalty += tr.kl_penalty;
      pt.mean_regularized_reward += tr.regularized_reward;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    pt.mean_raw_utility *= inv;
    pt.mean_kl_penalty *= inv;
    pt.mean_regularized_reward *= inv;
    result.curve.push_back(pt);
    if (progress) progress(pt);

    const AdvantageEstimates adv = compute_advantages(batch, cfg.gamma, cfg.gae_lambda, state.value);
    const double lr_scale = cfg.anneal_learning_rate ? 1.0 - static_cast<double>(it) / cfg.iterations : 1.0;
    state = ppo_update(state, batch, adv, cfg, update_rng, lr_scale);
  }
  result.policy = std::move(state.policy);
  result.value = std::move(state.value);
  return result;
}

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "iteration,mean_raw_utility,mean_kl_penalty,mean_regularized_reward\n";
  for (const auto& p : curve)
    out << p.iteration << ',' << p.mean_raw_utility << ',' << p.mean_kl_penalty << ',' << p.mean_regularized_reward
        << '\n';
}

}  // namespace bounded
