#include "bounded/policy.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/QR>

namespace bounded {

NetworkShape NetworkShape::mlp(int inputs, int outputs, const std::vector<int>& hidden) {
  NetworkShape s;
  s.layers.push_back(inputs);
  s.layers.insert(s.layers.end(), hidden.begin(), hidden.end());
  s.layers.push_back(outputs);
  return s;
}

int NetworkShape::parameter_count() const {
  int n = 0;
  for (std::size_t l = 1; l < layers.size(); ++l) n += layers[l] * layers[l - 1] + layers[l];
  return n;
}

Network::Network(NetworkShape shape, VectorXd params) : shape_(std::move(shape)), params_(std::move(params)) {
  if (shape_.layers.size() < 2) throw DimensionError("Network: need at least input and output layers");
  for (int w : shape_.layers)
    if (w <= 0) throw DimensionError("Network: layer widths must be positive");
  if (params_.size() != shape_.parameter_count()) {
    std::ostringstream os;
    os << "Network: expected " << shape_.parameter_count() << " parameters, got " << params_.size();
    throw DimensionError(os.str());
  }
}

Network Network::zeros(const NetworkShape& shape) {
  return Network(shape, VectorXd::Zero(shape.parameter_count()));
}

namespace {

MatrixXd orthogonal_matrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const bool tall = rows >= cols;
  const int r = tall ? rows : cols;
  const int c = tall ? cols : rows;
  MatrixXd a(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) a(i, j) = normal(rng);
  Eigen::HouseholderQR<MatrixXd> qr(a);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(r, c);
  const MatrixXd rr = qr.matrixQR().topLeftCorner(c, c);
  for (int j = 0; j < c; ++j)
    if (rr(j, j) < 0) q.col(j) *= -1.0;
  return tall ? q : MatrixXd(q.transpose());
}

}  // namespace

Network Network::orthogonal(const NetworkShape& shape, Rng& rng, double output_gain) {
  VectorXd params = VectorXd::Zero(shape.parameter_count());
  int offset = 0;
  const std::size_t n_layers = shape.layers.size() - 1;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = shape.layers[l];
    const int out = shape.layers[l + 1];
    const double gain = (l + 1 == n_layers) ? output_gain : 1.0;
    Eigen::Map<MatrixXd>(params.data() + offset, out, in) = gain * orthogonal_matrix(out, in, rng);
    offset += out * in + out;
  }
  return Network(shape, std::move(params));
}

MatrixXd Network::forward(const MatrixXd& inputs) const {
  Tape tape;
  return forward(inputs, tape);
}

MatrixXd Network::forward(const MatrixXd& inputs, Tape& tape) const {
  if (inputs.rows() != shape_.inputs()) {
    std::ostringstream os;
    os << "Network: input has " << inputs.rows() << " rows, network expects " << shape_.inputs();
    throw DimensionError(os.str());
  }
  tape.activations.clear();
  tape.activations.push_back(inputs);
  int offset = 0;
  const std::size_t n_layers = shape_.layers.size() - 1;
  MatrixXd x = inputs;
  for (std::size_t l = 0; l < n_layers; ++l) {
    const int in = shape_.layers[l];
    const int out = shape_.layers[l + 1];
    Eigen::Map<const MatrixXd> w(params_.data() + offset, out, in);
    Eigen::Map<const VectorXd> b(params_.data() + offset + out * in, out);
    offset += out * in + out;
    MatrixXd z = w * x;
    z.colwise() += b;
    if (l + 1 == n_layers) return z;
    x = z.array().tanh().matrix();
    tape.activations.push_back(x);
  }
  return x;  // unreachable
}

VectorXd Network::backward(const Tape& tape, const MatrixXd& grad_output) const {
  const std::size_t n_layers = shape_.layers.size() - 1;
  if (tape.activations.size() != n_layers) throw DimensionError("Network::backward: tape does not match network");
  VectorXd grad = VectorXd::Zero(params_.size());
  std::vector<int> offsets(n_layers);
  int offset = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    offsets[l] = offset;
    offset += shape_.layers[l + 1] * shape_.layers[l] + shape_.layers[l + 1];
  }
  MatrixXd delta = grad_output;  // d/dz of the current layer
  for (std::size_t l = n_layers; l-- > 0;) {
    const int in = shape_.layers[l];
    const int out = shape_.layers[l + 1];
    const MatrixXd& x = tape.activations[l];
    Eigen::Map<MatrixXd>(grad.data() + offsets[l], out, in).noalias() = delta * x.transpose();
    Eigen::Map<VectorXd>(grad.data() + offsets[l] + out * in, out) = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::Map<const MatrixXd> w(params_.data() + offsets[l], out, in);
    MatrixXd upstream = w.transpose() * delta;
    delta = upstream.array() * (1.0 - x.array().square());
  }
  return grad;
}

void Network::check_finite() const {
  if (!params_.allFinite()) throw ConvergenceError("network parameters contain non-finite values");
}

PolicyParameters init_policy(int obs_size, int actions, Rng& rng, const std::vector<int>& hidden) {
  return PolicyParameters(Network::orthogonal(NetworkShape::mlp(obs_size, actions, hidden), rng, 0.01));
}

ValueParameters init_value(int obs_size, Rng& rng, const std::vector<int>& hidden) {
  return ValueParameters(Network::orthogonal(NetworkShape::mlp(obs_size, 1, hidden), rng, 1.0));
}

VectorXd encode_observation(const VectorXd& env_features, int i, int n_agents, double lambda,
                            const PriorBelief& q) {
  if (n_agents < 1 || i < 0 || i >= n_agents) throw DimensionError("encode_observation: agent index out of range");
  if (!(lambda >= 0)) throw std::invalid_argument("encode_observation: lambda must be >= 0");
  ObservationLayout layout{static_cast<int>(env_features.size()), q.size()};
  VectorXd obs(layout.size());
  obs.head(layout.env_features) = env_features;
  obs[layout.id_offset()] = id_code(i, n_agents);
  obs[layout.lambda_offset()] = lambda_feature(lambda);
  obs.tail(layout.actions) = q.probs();
  return obs;
}

MatrixXd softmax_columns(const MatrixXd& logits) {
  MatrixXd p = (logits.rowwise() - logits.colwise().maxCoeff()).array().exp().matrix();
  p.array().rowwise() /= p.colwise().sum().array();
  return p;
}

ActionDistribution forward(const PolicyParameters& params, const VectorXd& obs) {
  params.check_finite();
  ActionDistribution d;
  d.logits = params.forward(obs).col(0);
  d.probs = softmax(d.logits);
  return d;
}

int sample_action(const VectorXd& probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng) * probs.sum();
  double acc = 0.0;
  int last_positive = 0;
  for (int a = 0; a < probs.size(); ++a) {
    if (probs[a] <= 0) continue;
    last_positive = a;
    acc += probs[a];
    if (u < acc) return a;
  }
  return last_positive;
}

int greedy_action(const ActionDistribution& dist) {
  Eigen::Index best;
  dist.probs.maxCoeff(&best);
  return static_cast<int>(best);
}

std::pair<double, VectorXd> log_prob_and_grad(const PolicyParameters& params, const VectorXd& obs, int action) {
  if (action < 0 || action >= params.outputs()) throw DimensionError("log_prob_and_grad: action out of range");
  Network::Tape tape;
  const VectorXd logits = params.forward(obs, tape).col(0);
  const VectorXd probs = softmax(logits);
  const double shift = logits.maxCoeff();
  const double log_z = shift + std::log((logits.array() - shift).exp().sum());
  // d log softmax(z)_a / dz = e_a - pi
  MatrixXd g = -probs;
  g(action, 0) += 1.0;
  return {logits[action] - log_z, params.backward(tape, g)};
}

}  // namespace bounded
