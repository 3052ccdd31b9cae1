#include "bounded/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bounded {

namespace detail {

void throw_unsupported_action(Eigen::Index a) {
  std::ostringstream os;
  os << "kl divergence is infinite: policy puts mass on action " << a << " where the prior has none";
  throw std::domain_error(os.str());
}

void throw_length_mismatch(Eigen::Index n, Eigen::Index m) {
  std::ostringstream os;
  os << "distribution length mismatch: " << n << " vs " << m;
  throw DimensionError(os.str());
}

}  // namespace detail

ActionSpace::ActionSpace(double lo, double step, int n) : lo_(lo), step_(step), n_(n) {
  if (n < 2) throw std::invalid_argument("ActionSpace: need at least two actions");
  if (!(step > 0) || !std::isfinite(step) || !std::isfinite(lo))
    throw std::invalid_argument("ActionSpace: step must be positive and finite");
}

ActionSpace ActionSpace::integer_range(int lo, int hi) { return ActionSpace(lo, 1.0, hi - lo + 1); }

ActionSpace ActionSpace::from_bounds(double lo, double hi, double step) {
  const double count = (hi - lo) / step;
  const double rounded = std::round(count);
  if (std::abs(count - rounded) > 1e-9 * std::max(1.0, std::abs(count)))
    throw std::invalid_argument("ActionSpace: upper bound is not on the grid");
  return ActionSpace(lo, step, static_cast<int>(rounded) + 1);
}

VectorXd ActionSpace::values() const {
  VectorXd v(n_);
  for (int i = 0; i < n_; ++i) v[i] = value(i);
  return v;
}

int ActionSpace::index_of(double v) const {
  const double pos = (v - lo_) / step_;
  const double idx = std::round(pos);
  if (idx < 0 || idx >= n_) return -1;
  if (std::abs(value(static_cast<int>(idx)) - v) > 1e-9 * std::max(1.0, std::abs(v))) return -1;
  return static_cast<int>(idx);
}

int ActionSpace::nearest_index(double v) const {
  const double idx = std::round((v - lo_) / step_);
  return static_cast<int>(std::clamp(idx, 0.0, static_cast<double>(n_ - 1)));
}

PriorBelief::PriorBelief(VectorXd probs) : probs_(std::move(probs)) {
  if (!is_distribution(probs_)) throw std::invalid_argument("PriorBelief: not a probability vector");
}

PriorSpec PriorSpec::parse(const std::string& text) {
  if (text == "uniform") return {};
  const std::string prefix = "prominent";
  if (text.rfind(prefix, 0) == 0) {
    PriorSpec spec{Kind::kProminent, 3.0};
    if (text.size() > prefix.size()) {
      if (text[prefix.size()] != ':') throw ConfigError("prior: expected 'prominent' or 'prominent:<boost>'");
      try {
        spec.boost = std::stod(text.substr(prefix.size() + 1));
      } catch (const std::exception&) {
        throw ConfigError("prior: bad boost in '" + text + "'");
      }
    }
    if (!(spec.boost >= 1.0)) throw ConfigError("prior: boost must be >= 1");
    return spec;
  }
  throw ConfigError("prior: unknown prior '" + text + "'");
}

std::string PriorSpec::to_string() const {
  if (kind == Kind::kUniform) return "uniform";
  std::ostringstream os;
  os.precision(17);
  os << "prominent:" << boost;
  return os.str();
}

Supertype::Supertype(double mu, double sigma_star, PriorSpec prior, std::string role)
    : mu_(mu), sigma_star_(sigma_star), prior_(prior), role_(std::move(role)) {
  if (!(mu >= 0) || !std::isfinite(mu)) throw std::invalid_argument("Supertype: mu must be >= 0");
  if (!(sigma_star >= 0) || !std::isfinite(sigma_star))
    throw std::invalid_argument("Supertype: sigma_star must be >= 0");
}

double sample_lambda(const Supertype& st, Rng& rng) {
  const double sigma = st.sigma();
  if (sigma == 0.0) return st.mu();
  std::normal_distribution<double> normal(st.mu(), sigma);
  return std::max(0.0, normal(rng));
}

PriorBelief uniform_prior(const ActionSpace& space) {
  return PriorBelief(VectorXd::Constant(space.size(), 1.0 / space.size()));
}

PriorBelief prominent_number_prior(const ActionSpace& space, double boost) {
  if (!(boost >= 1.0)) throw std::invalid_argument("prominent_number_prior: boost must be >= 1");
  VectorXd w(space.size());
  bool any = false;
  for (int i = 0; i < space.size(); ++i) {
    const double r = space.value(i) / 5.0;
    const bool prominent = std::abs(r - std::round(r)) < 1e-9;
    any = any || prominent;
    w[i] = prominent ? boost : 1.0;
  }
  if (!any) throw std::invalid_argument("prominent_number_prior: no multiples of 5 in the action grid");
  return PriorBelief(w / w.sum());
}

PriorBelief make_prior(const PriorSpec& spec, const ActionSpace& space) {
  return spec.kind == PriorSpec::Kind::kUniform ? uniform_prior(space)
                                                : prominent_number_prior(space, spec.boost);
}

}  // namespace bounded
