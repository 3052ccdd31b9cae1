#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "bounded/calibration.hpp"

using namespace bounded;

namespace {

VectorXd vec(std::initializer_list<double> xs) {
  VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const Checkpoint& trained_duopoly(double mu) {
  static std::map<double, Checkpoint> cache;
  auto it = cache.find(mu);
  if (it == cache.end()) {
    const auto env = make_environment("cournot_duopoly");
    TrainingConfig cfg = TrainingConfig::desk_profile(*env);
    cfg.seed = 21;
    it = cache.emplace(mu, train_checkpoint(*env, {mu, 0}, cfg)).first;
  }
  return it->second;
}

EmpiricalDataset constant_dataset(double value, int n) {
  EmpiricalDataset d;
  d.env = "cournot_duopoly";
  for (int i = 0; i < n; ++i) d.records.push_back({i / 10, i % 10, value});
  return d;
}

// Rank oracle: for each value, 1 + (#strictly smaller) + (#equal - 1) / 2.
std::vector<double> naive_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    int less = 0, equal = 0;
    for (double x : v) {
      less += x < v[i];
      equal += x == v[i];
    }
    r[i] = 1 + less + (equal - 1) / 2.0;
  }
  return r;
}

}  // namespace

TEST(Histogram, Examples) {
  const auto grid = ActionSpace::integer_range(8, 32);
  const std::vector<double> tens(10, 20.0);
  const VectorXd h = histogram(tens, grid, Binning::kExact);
  EXPECT_EQ(h[grid.index_of(20)], 1.0);
  EXPECT_EQ(h.sum(), 1.0);
  const std::vector<double> ends{8, 32};
  const VectorXd e = histogram(ends, grid, Binning::kExact);
  EXPECT_EQ(e[0], 0.5);
  EXPECT_EQ(e[24], 0.5);
}

TEST(Histogram, SumsToOneAndBinsPrices) {
  Rng rng(1);
  std::uniform_real_distribution<double> u(-2, 12);
  const auto grid = ActionSpace::from_bounds(0, 10, 0.1);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v(1 + rng() % 500);
    for (auto& x : v) x = u(rng);
    EXPECT_NEAR(histogram(v, grid, Binning::kNearest).sum(), 1.0, 1e-12);
  }
  const std::vector<double> off{20.5};
  EXPECT_THROW(histogram(off, ActionSpace::integer_range(8, 32), Binning::kExact), DataError);
  EXPECT_THROW(histogram(std::vector<double>{}, grid, Binning::kNearest), DataError);
}

TEST(Folds, HalvesAndCoverage) {
  for (std::size_t n : {30u, 31u, 2u, 1000u}) {
    const auto plan = split_5x2(n, 7);
    for (int r = 0; r < FoldPlan::kRepetitions; ++r) {
      const auto& a = plan.halves[r][0];
      const auto& b = plan.halves[r][1];
      EXPECT_LE(std::abs(static_cast<long>(a.size()) - static_cast<long>(b.size())), 1);
      std::vector<int> all(a);
      all.insert(all.end(), b.begin(), b.end());
      std::sort(all.begin(), all.end());
      std::vector<int> expect(n);
      std::iota(expect.begin(), expect.end(), 0);
      EXPECT_EQ(all, expect);
      std::vector<int> common;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
      EXPECT_TRUE(common.empty());
      EXPECT_EQ(plan.train(r, 1), plan.test(r, 0));
    }
  }
  EXPECT_EQ(split_5x2(30, 1).halves[0][0].size(), 15u);
  EXPECT_EQ(split_5x2(31, 1).halves[0][0].size(), 16u);
  EXPECT_EQ(split_5x2(31, 1).halves[0][1].size(), 15u);
  EXPECT_THROW(split_5x2(1, 1), DataError);
}

TEST(Folds, DeterministicAndIndependentShuffles) {
  const auto a = split_5x2(100, 3);
  const auto b = split_5x2(100, 3);
  const auto c = split_5x2(100, 4);
  EXPECT_EQ(a.halves, b.halves);
  EXPECT_NE(a.halves, c.halves);
  EXPECT_NE(a.halves[0][0], a.halves[1][0]);
}

TEST(Mse, Examples) {
  const VectorXd h = vec({0.2, 0.3, 0.5});
  EXPECT_EQ(mse(h, h), 0.0);
  EXPECT_EQ(mse(vec({1, 0}), vec({0, 1})), 1.0);
  const VectorXd g = vec({0.1, 0.6, 0.3});
  EXPECT_EQ(mse(h, g), mse(g, h));
  EXPECT_THROW(mse(h, vec({0.5, 0.5})), DimensionError);
}

TEST(Grid, DefaultsAndParsing) {
  const Grid g = Grid::standard();
  EXPECT_EQ(g.size(), 42u);
  EXPECT_EQ(g.mu_values, (std::vector<double>{0, 0.25, 0.5, 1, 2.5, 5, 10}));
  EXPECT_EQ(g.sigma_star_values, (std::vector<double>{0, 0.05, 0.1, 0.25, 0.5, 1}));
  const Grid small = Grid::parse("mu=0,1 sigma_star=0,1");
  EXPECT_EQ(small.size(), 4u);
  EXPECT_EQ(small.cell(3), (Cell{1, 1}));
  EXPECT_EQ(small.cell(1), (Cell{0, 1}));
  EXPECT_EQ(Grid::parse("mu=2").size(), 6u);
  EXPECT_THROW(Grid::parse("lambda=1"), ConfigError);
  EXPECT_THROW(Grid::parse("mu=-1"), ConfigError);
}

TEST(Dataset, CsvRoundTripAndErrors) {
  const auto d = constant_dataset(20, 12);
  const auto back = EmpiricalDataset::parse_csv(d.to_csv());
  EXPECT_EQ(back.env, "cournot_duopoly");
  ASSERT_EQ(back.size(), 12u);
  EXPECT_EQ(back.records[11].subject, 1);
  EXPECT_EQ(back.records[11].round, 1);
  try {
    EmpiricalDataset::parse_csv("env,subject,round,value\ncobweb,1,2,5.1\ncobweb,1,x,5.2\n", "d.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("d.csv:3"), std::string::npos);
  }
  EXPECT_THROW(EmpiricalDataset::parse_csv("env,subject,round\n"), DataError);
  EXPECT_THROW(EmpiricalDataset::parse_csv("env,subject,round,value\n"), DataError);
  EXPECT_THROW(EmpiricalDataset::parse_csv("env,subject,round,value\ncobweb,1,2,5,6\n"), DataError);
}

TEST(Evaluate, UsesTestHalfOnly) {
  auto data = constant_dataset(20, 40);
  for (int i = 20; i < 40; ++i) data.records[i].value = 21;
  std::vector<int> train(20), test(20);
  std::iota(train.begin(), train.end(), 0);
  std::iota(test.begin(), test.end(), 20);
  const auto grid = ActionSpace::integer_range(8, 32);
  VectorXd sim = VectorXd::Zero(25);
  sim[grid.index_of(21)] = 1;
  EXPECT_EQ(evaluate(sim, data, train, test, grid, Binning::kExact), 0.0);
  auto mutated = data;
  for (int i : train) mutated.records[i].value = 8;
  EXPECT_EQ(evaluate(sim, mutated, train, test, grid, Binning::kExact),
            evaluate(sim, data, train, test, grid, Binning::kExact));
  VectorXd other = VectorXd::Zero(25);
  other[0] = 1;
  const double rmse = evaluate(other, data, train, test, grid, Binning::kExact);
  EXPECT_NEAR(rmse * rmse, mse(other, histogram(data.values(test), grid, Binning::kExact)), 1e-12);
  std::vector<int> overlap(test);
  overlap.push_back(0);
  EXPECT_THROW(evaluate(sim, data, train, overlap, grid, Binning::kExact), DataError);
}

TEST(SelectCell, ArgminWithTieBreakAndFailures) {
  const Grid grid = Grid::parse("mu=0,1 sigma_star=0,0.5");
  const VectorXd target = vec({0.5, 0.5});
  std::vector<CellSimulation> sims(4);
  sims[0].histogram = vec({1, 0});
  sims[1].histogram = vec({0.5, 0.5});
  sims[2].error = "diverged";
  sims[3].histogram = vec({0.5, 0.5});
  const auto r = select_cell(grid, sims, target);
  EXPECT_EQ(r.best, (Cell{0, 0.5}));
  EXPECT_FALSE(r.cells[2].ok);
  for (const auto& c : r.cells)
    if (c.ok) EXPECT_GE(c.train_mse, r.cells[r.best_index].train_mse);
  std::vector<CellSimulation> failed(4);
  for (auto& s : failed) s.error = "x";
  EXPECT_THROW(select_cell(grid, failed, target), ConvergenceError);
}

TEST(Ranks, TiedAndDistinctRows) {
  const std::vector<double> supply{0.33, 0.33, 0.02};
  EXPECT_EQ(average_ranks(supply), (std::vector<double>{2.5, 2.5, 1}));
  const std::vector<double> flat(4, 0.1);
  EXPECT_EQ(average_ranks(flat), std::vector<double>(4, 2.5));
}

TEST(Ranks, MatchNaiveOracleOnRandomTables) {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    std::vector<double> v(1 + rng() % 8);
    for (auto& x : v) x = static_cast<double>(rng() % 5) / 10;
    const auto r = average_ranks(v);
    EXPECT_EQ(r, naive_ranks(v));
    EXPECT_DOUBLE_EQ(std::accumulate(r.begin(), r.end(), 0.0), v.size() * (v.size() + 1) / 2.0);
  }
}

TEST(RankModels, FourEnvironmentsWithHalfWeights) {
  const std::string csv =
      "env,model,rmse_mean,rmse_std\n"
      "supply_chain,rational,0.33,0.004\nsupply_chain,marl,0.33,0.004\nsupply_chain,proposed,0.02,0.005\n"
      "cournot_duopoly,rational,0.16,0.001\ncournot_duopoly,marl,0.13,0.001\ncournot_duopoly,proposed,0.04,0.001\n"
      "cournot_triopoly,rational,0.16,0.002\ncournot_triopoly,marl,0.15,0.002\ncournot_triopoly,proposed,0.03,0.001\n"
      "cobweb,rational,0.02,0.0005\ncobweb,marl,0.03,0.0005\ncobweb,proposed,0.01,0.0005\n";
  const auto table = rank_models(parse_rmse_csv(csv), {{"cournot_duopoly", 0.5}, {"cournot_triopoly", 0.5}});
  MatrixXd expected(4, 3);
  expected << 2.5, 2.5, 1, 3, 2, 1, 3, 2, 1, 2, 3, 1;
  EXPECT_EQ(table.ranks, expected);
  EXPECT_NEAR(table.average_rank[0], 2.5, 1e-12);
  EXPECT_NEAR(table.average_rank[1], 2.5, 1e-12);
  EXPECT_NEAR(table.average_rank[2], 1.0, 1e-12);
  const std::string text = table.to_text();
  EXPECT_NE(text.find("0.33 ± 0.004 (2.5)"), std::string::npos);
  EXPECT_NE(text.find("< 0.001"), std::string::npos);
  EXPECT_EQ(text.substr(text.rfind("Rank"), 4), "Rank");
}

TEST(RankModels, Errors) {
  std::vector<RmseEntry> e{{"a", "m1", 0.1, 0}, {"a", "m2", 0.2, 0}, {"b", "m1", 0.3, 0}};
  EXPECT_THROW(rank_models(e), DataError);
  e.push_back({"b", "m2", 0.1, 0});
  EXPECT_NO_THROW(rank_models(e));
  EXPECT_THROW(rank_models(e, {{"a", 1.5}}), ConfigError);
  EXPECT_THROW(rank_models(e, {{"a", 0}}), ConfigError);
  EXPECT_THROW(rank_models(e, {{"c", 0.5}}), ConfigError);
  const auto single = rank_models({{"a", "m1", 0.1, 0}, {"b", "m1", 0.3, 0}});
  EXPECT_EQ(single.ranks, MatrixXd::Ones(2, 1));
}

TEST(Simulate, NashModeAtZeroCostAndDeterminism) {
  const auto env = make_environment("cournot_duopoly");
  const auto& ckpt = trained_duopoly(0);
  const VectorXd h = simulate_distribution(ckpt, *env, ckpt.supertype(), 500, 9);
  Eigen::Index mode;
  h.maxCoeff(&mode);
  EXPECT_EQ(env->action_space().value(static_cast<int>(mode)), 20);
  EXPECT_EQ(h, simulate_distribution(ckpt, *env, ckpt.supertype(), 500, 9));
  EXPECT_NEAR(h.sum(), 1.0, 1e-12);
  EXPECT_THROW(simulate_distribution(ckpt, *make_environment("supply_chain"), ckpt.supertype(), 10, 1),
               DimensionError);
}

TEST(Simulate, HugeCostFollowsUniformPrior) {
  const auto env = make_environment("cournot_duopoly");
  const auto& ckpt = trained_duopoly(1000);
  const VectorXd h = simulate_distribution(ckpt, *env, ckpt.supertype(), 20000, 10);
  EXPECT_LT(tv_distance(h, VectorXd::Constant(h.size(), 1.0 / h.size())), 0.05);
}

TEST(Cache, ReusesTrainedPolicies) {
  const auto env = make_environment("cournot_duopoly");
  TrainingConfig cfg = TrainingConfig::desk_profile(*env);
  cfg.iterations = 3;
  PolicyCache cache;
  const auto a = cache.get_or_train(*env, {1, 0}, 5, cfg);
  const auto b = cache.get_or_train(*env, {1, 0}, 5, cfg);
  EXPECT_EQ(a.get(), b.get());
  EXPECT_EQ(cache.trained(), 1u);
  cache.get_or_train(*env, {1, 0}, 6, cfg);
  EXPECT_EQ(cache.trained(), 2u);
}

TEST(Calibrate, NashDataSelectsZeroCost) {
  const auto env = make_environment("cournot_duopoly");
  CalibrationSettings s;
  s.training = TrainingConfig::desk_profile(*env);
  s.seed = 4;
  s.sim_episodes = 500;
  PolicyCache cache;
  const auto rep = calibrate(*env, constant_dataset(20, 200), Grid::parse("mu=0,1 sigma_star=0"), s, cache);
  ASSERT_EQ(rep.folds.size(), 10u);
  for (const auto& f : rep.folds) EXPECT_EQ(f.best.mu, 0.0);
  EXPECT_EQ(rep.cells.size(), 20u);
  EXPECT_EQ(cache.trained(), 10u);
  for (const auto& c : rep.cells) EXPECT_TRUE(c.ok);
  EXPECT_NE(rep.summary_csv().find("cournot_duopoly,proposed,"), std::string::npos);
}

TEST(Calibrate, RejectsMismatchedEnvironmentTag) {
  const auto env = make_environment("cournot_triopoly");
  PolicyCache cache;
  EXPECT_THROW(calibrate(*env, constant_dataset(20, 20), Grid::parse("mu=0 sigma_star=0"), {}, cache), DataError);
}

TEST(Synthesize, RecordsDecisionsOrPrices) {
  const auto env = make_environment("cournot_duopoly");
  const auto& ckpt = trained_duopoly(0);
  const auto d = synthesize_dataset(*env, ckpt.policy, ckpt.supertype(), 3, 4, 1);
  EXPECT_EQ(d.size(), 3u * 4 * 2);
  for (const auto& r : d.records) EXPECT_GE(env->action_space().index_of(r.value), 0);
}
