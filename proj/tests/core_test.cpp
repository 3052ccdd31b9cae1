#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bounded/core.hpp"

using namespace bounded;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

VectorXd random_distribution(int n, Rng& rng, bool allow_zeros) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = (allow_zeros && u(rng) < 0.2) ? 0.0 : u(rng) + 1e-3;
  if (p.sum() == 0) p[0] = 1;
  return p / p.sum();
}

// Composite Simpson rule for E[max(0, X)], X ~ N(mu, sigma).
double clipped_normal_mean(double mu, double sigma) {
  const double hi = mu + 12 * sigma;
  const int n = 200000;
  const double h = hi / n;
  auto f = [&](double x) {
    const double z = (x - mu) / sigma;
    return x * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi));
  };
  double s = f(0) + f(hi);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

}  // namespace

TEST(ActionSpace, IntegerRangeEnumeratesAscending) {
  const auto s = ActionSpace::integer_range(8, 32);
  EXPECT_EQ(s.size(), 25);
  EXPECT_DOUBLE_EQ(s.lo(), 8);
  EXPECT_DOUBLE_EQ(s.hi(), 32);
  for (int i = 1; i < s.size(); ++i) EXPECT_GT(s.value(i), s.value(i - 1));
  EXPECT_EQ(s.index_of(20), 12);
  EXPECT_EQ(s.index_of(20.5), -1);
  EXPECT_EQ(s.nearest_index(100), 24);
  EXPECT_EQ(s.nearest_index(-3), 0);
}

TEST(ActionSpace, FixedPointGrid) {
  const auto s = ActionSpace::from_bounds(0, 10, 0.1);
  EXPECT_EQ(s.size(), 101);
  EXPECT_NEAR(s.hi(), s.lo() + (s.size() - 1) * s.step(), 1e-12);
  EXPECT_EQ(s.index_of(5.2), 52);
  EXPECT_EQ(s.nearest_index(5.24), 52);
  EXPECT_EQ(s.nearest_index(5.26), 53);
}

TEST(ActionSpace, RejectsDegenerateGrids) {
  EXPECT_THROW(ActionSpace(0, 1, 1), std::invalid_argument);
  EXPECT_THROW(ActionSpace(0, 0, 5), std::invalid_argument);
  EXPECT_THROW(ActionSpace::from_bounds(0, 1, 0.3), std::invalid_argument);
}

TEST(PriorBelief, ValidatesDistribution) {
  EXPECT_NO_THROW(PriorBelief(vec({0.25, 0.75})));
  EXPECT_THROW(PriorBelief(vec({0.5, 0.6})), std::invalid_argument);
  EXPECT_THROW(PriorBelief(vec({-0.1, 1.1})), std::invalid_argument);
}

TEST(Priors, Uniform) {
  const auto q3 = uniform_prior(ActionSpace::integer_range(0, 2));
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(q3[a], 1.0 / 3, 1e-15);
  const auto q25 = uniform_prior(ActionSpace::integer_range(8, 32));
  for (int a = 0; a < 25; ++a) EXPECT_NEAR(q25[a], 0.04, 1e-15);
  EXPECT_EQ(kl_divergence(q25.probs(), q25), 0.0);
}

TEST(Priors, ProminentNumbers) {
  const auto space = ActionSpace::integer_range(8, 32);
  const auto flat = prominent_number_prior(space, 1.0);
  EXPECT_LT(tv_distance(flat.probs(), uniform_prior(space).probs()), 1e-15);
  const auto q = prominent_number_prior(space, 3.0);
  EXPECT_NEAR(q[space.index_of(20)] / q[space.index_of(21)], 3.0, 1e-12);
  EXPECT_NEAR(q[space.index_of(10)], q[space.index_of(30)], 1e-15);
  EXPECT_NEAR(q.probs().sum(), 1.0, 1e-12);
  EXPECT_THROW(prominent_number_prior(ActionSpace::integer_range(1, 4)), std::invalid_argument);
}

TEST(PriorSpec, ParsesAndPrints) {
  EXPECT_EQ(PriorSpec::parse("uniform").kind, PriorSpec::Kind::kUniform);
  const auto p = PriorSpec::parse("prominent:4");
  EXPECT_EQ(p.kind, PriorSpec::Kind::kProminent);
  EXPECT_DOUBLE_EQ(p.boost, 4);
  EXPECT_EQ(PriorSpec::parse(p.to_string()).boost, 4);
  EXPECT_THROW(PriorSpec::parse("gaussian"), ConfigError);
}

TEST(Supertype, SigmaIsMuTimesSigmaStar) {
  for (double mu : {0.0, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0})
    for (double ss : {0.0, 0.05, 0.1, 0.25, 0.5, 1.0}) EXPECT_EQ(Supertype(mu, ss).sigma(), mu * ss);
  EXPECT_THROW(Supertype(-1, 0), std::invalid_argument);
  EXPECT_THROW(Supertype(1, -0.1), std::invalid_argument);
}

TEST(SampleLambda, ZeroSpreadIsDeterministic) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_lambda(Supertype(1, 0), rng), 1.0);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_lambda(Supertype(0, 1), rng), 0.0);
}

TEST(SampleLambda, NeverNegative) {
  Rng rng(2);
  for (int i = 0; i < 100000; ++i) EXPECT_GE(sample_lambda(Supertype(0.1, 1), rng), 0.0);
}

TEST(SampleLambda, ClippedMeanMatchesQuadrature) {
  const double expected = clipped_normal_mean(1.0, 0.5);
  EXPECT_NEAR(expected, 1.00425, 1e-4);
  Rng rng(3);
  const Supertype st(1.0, 0.5);
  double sum = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) sum += sample_lambda(st, rng);
  EXPECT_NEAR(sum / n, expected, 0.01);
}

TEST(SampleLambda, SameSeedSameSequence) {
  Rng a(9), b(9);
  const Supertype st(2, 0.5);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_lambda(st, a), sample_lambda(st, b));
}

TEST(Kl, HandValues) {
  const VectorXd half = vec({0.5, 0.5});
  EXPECT_EQ(kl_divergence(half, half), 0.0);
  EXPECT_NEAR(kl_divergence(vec({1, 0}), half), std::log(2.0), 1e-15);
  const VectorXd pi = vec({0.75, 0.25});
  EXPECT_NEAR(kl_divergence(pi, half), 0.75 * std::log(1.5) + 0.25 * std::log(0.5), 1e-15);
  EXPECT_NEAR(kl_contribution(pi, half, 1), 0.25 * std::log(0.5), 1e-15);
  EXPECT_LT(kl_contribution(pi, half, 1), 0.0);
  EXPECT_EQ(kl_contribution(half, half, 0), 0.0);
}

TEST(Kl, RejectsMissingSupport) {
  EXPECT_THROW(kl_divergence(vec({0.5, 0.5}), vec({1.0, 0.0})), std::domain_error);
  EXPECT_NO_THROW(kl_divergence(vec({1.0, 0.0}), vec({1.0, 0.0})));
  EXPECT_THROW(kl_divergence(vec({0.5, 0.5}), vec({0.2, 0.3, 0.5})), DimensionError);
}

TEST(Kl, RandomPairProperties) {
  Rng rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 30);
    const VectorXd pi = random_distribution(n, rng, true);
    const VectorXd q = random_distribution(n, rng, false);
    const double kl = kl_divergence(pi, q);
    double sum = 0;
    for (int a = 0; a < n; ++a) sum += kl_contribution(pi, q, a);
    EXPECT_NEAR(sum, kl, 1e-12);
    EXPECT_GE(kl, -1e-12);
    EXPECT_NEAR(kl_divergence(pi, VectorXd::Constant(n, 1.0 / n)), std::log(double(n)) - entropy(pi), 1e-12);
    EXPECT_NEAR(kl_divergence(q, q), 0.0, 1e-12);
  }
}

TEST(Kl, TemplatedOverScalar) {
  Eigen::VectorXf pi(2), q(2);
  pi << 1.0f, 0.0f;
  q << 0.5f, 0.5f;
  EXPECT_NEAR(kl_divergence(pi, q), std::log(2.0f), 1e-6f);
}

TEST(RegularizedReward, Arithmetic) {
  EXPECT_EQ(regularized_reward(16, 0, 123.0), 16.0);
  EXPECT_NEAR(regularized_reward(16, 1, 0.693147), 15.306853, 1e-12);
  EXPECT_NEAR(regularized_reward(0, 2, -0.1), 0.2, 1e-15);
}

TEST(Softmax, StableAndShiftInvariant) {
  const VectorXd l = vec({1000, 1001, 999});
  const VectorXd p = softmax(l);
  EXPECT_TRUE(is_distribution(p));
  EXPECT_LT(tv_distance(p, softmax(vec({1, 2, 0}))), 1e-15);
}

TEST(Seeds, DeriveSeedSeparatesStreams) {
  EXPECT_EQ(derive_seed(7, 1, 2), derive_seed(7, 1, 2));
  EXPECT_NE(derive_seed(7, 1, 2), derive_seed(7, 2, 1));
  EXPECT_NE(derive_seed(7, 1), derive_seed(8, 1));
}
