#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bounded/core.hpp"
#include "bounded/types.hpp"

namespace bounded {

/// Layer widths from input to output, e.g. {obs, 64, 64, actions}.
struct NetworkShape {
  std::vector<int> layers;

  static NetworkShape mlp(int inputs, int outputs, const std::vector<int>& hidden = {64, 64});

  int inputs() const { return layers.front(); }
  int outputs() const { return layers.back(); }
  int parameter_count() const;
  bool operator==(const NetworkShape&) const = default;
};

/// Feedforward network with tanh hidden layers and a linear output layer.
///
/// Parameters live in one flat vector. For each layer, in order, the weight
/// matrix (out x in, column-major) is followed by the bias vector (out).
class Network {
 public:
  Network() = default;
  Network(NetworkShape shape, VectorXd params);

  static Network zeros(const NetworkShape& shape);
  /// Orthogonal init with gain 1 on hidden layers and `output_gain` on the last layer; zero biases.
  static Network orthogonal(const NetworkShape& shape, Rng& rng, double output_gain);

  const NetworkShape& shape() const { return shape_; }
  const VectorXd& parameters() const { return params_; }
  VectorXd& parameters() { return params_; }
  int inputs() const { return shape_.inputs(); }
  int outputs() const { return shape_.outputs(); }

  /// Column-batched evaluation: inputs is (inputs x B), result is (outputs x B).
  MatrixXd forward(const MatrixXd& inputs) const;

  /// Activations retained for backpropagation.
  struct Tape {
    std::vector<MatrixXd> activations;  // input, hidden_1, ..., hidden_k
  };
  MatrixXd forward(const MatrixXd& inputs, Tape& tape) const;
  /// Gradient of sum_b <grad_output[:, b], output[:, b]> with respect to every parameter.
  VectorXd backward(const Tape& tape, const MatrixXd& grad_output) const;

  /// Throws ConvergenceError when any parameter is NaN or infinite.
  void check_finite() const;

 private:
  NetworkShape shape_;
  VectorXd params_;
};

/// Weights of the shared supertype policy (softmax over network outputs).
class PolicyParameters : public Network {
 public:
  using Network::Network;
  PolicyParameters() = default;
  explicit PolicyParameters(Network net) : Network(std::move(net)) {}
};

/// Weights of the critic (scalar output).
class ValueParameters : public Network {
 public:
  using Network::Network;
  ValueParameters() = default;
  explicit ValueParameters(Network net) : Network(std::move(net)) {}
};

PolicyParameters init_policy(int obs_size, int actions, Rng& rng, const std::vector<int>& hidden = {64, 64});
ValueParameters init_value(int obs_size, Rng& rng, const std::vector<int>& hidden = {64, 64});

/// Observation layout: [env features..., id code, lambda feature, prior q...].
struct ObservationLayout {
  int env_features = 0;
  int actions = 0;

  int size() const { return env_features + 2 + actions; }
  int id_offset() const { return env_features; }
  int lambda_offset() const { return env_features + 1; }
  int prior_offset() const { return env_features + 2; }
};

inline double id_code(int i, int n_agents) { return n_agents <= 1 ? 0.0 : double(i) / (n_agents - 1); }
inline double lambda_feature(double lambda) { return lambda / (1.0 + lambda); }

VectorXd encode_observation(const VectorXd& env_features, int i, int n_agents, double lambda,
                            const PriorBelief& q);

struct ActionDistribution {
  VectorXd logits;
  VectorXd probs;
};

ActionDistribution forward(const PolicyParameters& params, const VectorXd& obs);

/// Draws an index with probability probs[a]. Zero-mass entries are never returned.
int sample_action(const VectorXd& probs, Rng& rng);
inline int sample_action(const ActionDistribution& dist, Rng& rng) { return sample_action(dist.probs, rng); }

int greedy_action(const ActionDistribution& dist);

/// log pi(a|obs) and its gradient with respect to the flat parameter vector.
std::pair<double, VectorXd> log_prob_and_grad(const PolicyParameters& params, const VectorXd& obs, int action);

/// Column-wise max-stabilized softmax.
MatrixXd softmax_columns(const MatrixXd& logits);

}  // namespace bounded
