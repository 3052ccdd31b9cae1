#include "bounded/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace bounded {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hexf(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool to_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return *end == '\0' && std::isfinite(out);
}

bool to_int(const std::string& s, int& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (*end != '\0') return false;
  out = static_cast<int>(v);
  return true;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, std::max(1, jobs));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

// ---------------------------------------------------------------------------
// Datasets

std::vector<double> EmpiricalDataset::values() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.value);
  return out;
}

std::vector<double> EmpiricalDataset::values(std::span<const int> indices) const {
  std::vector<double> out;
  out.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= records.size())
      throw DataError("observation index " + std::to_string(i) + " out of range");
    out.push_back(records[i].value);
  }
  return out;
}

EmpiricalDataset EmpiricalDataset::parse_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  EmpiricalDataset d;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (!header) {
      if (line != "env,subject,round,value")
        throw DataError(origin + ":" + std::to_string(lineno) + ": expected header env,subject,round,value");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    DecisionRecord r;
    const auto where = origin + ":" + std::to_string(lineno) + ": ";
    if (f.size() != 4) throw DataError(where + "expected 4 fields, got " + std::to_string(f.size()));
    const std::string env = trim(f[0]);
    if (env.empty()) throw DataError(where + "empty env tag");
    if (d.env.empty()) d.env = env;
    if (env != d.env) throw DataError(where + "env '" + env + "' differs from '" + d.env + "'");
    if (!to_int(trim(f[1]), r.subject)) throw DataError(where + "bad subject '" + f[1] + "'");
    if (!to_int(trim(f[2]), r.round)) throw DataError(where + "bad round '" + f[2] + "'");
    if (!to_double(trim(f[3]), r.value)) throw DataError(where + "bad value '" + f[3] + "'");
    d.records.push_back(r);
  }
  if (!header) throw DataError(origin + ": empty dataset file");
  if (d.records.empty()) throw DataError(origin + ": dataset has no observations");
  return d;
}

EmpiricalDataset EmpiricalDataset::load_csv(const std::string& path) { return parse_csv(read_file(path), path); }

std::string EmpiricalDataset::to_csv() const {
  std::ostringstream os;
  os << "env,subject,round,value\n";
  for (const auto& r : records) os << env << ',' << r.subject << ',' << r.round << ',' << fmt(r.value) << '\n';
  return os.str();
}

void EmpiricalDataset::save_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_csv();
}

VectorXd histogram(std::span<const double> values, const ActionSpace& grid, Binning rule) {
  if (values.empty()) throw DataError("histogram of an empty sample");
  VectorXd h = VectorXd::Zero(grid.size());
  for (double v : values) {
    int k = -1;
    if (rule == Binning::kExact) {
      k = grid.index_of(v);
      if (k < 0) throw DataError("value " + fmt(v) + " is not on the grid");
    } else {
      if (!std::isfinite(v)) throw DataError("non-finite value in histogram");
      k = grid.nearest_index(v);
    }
    h[k] += 1.0;
  }
  return h / static_cast<double>(values.size());
}

Binning binning_for(const Environment& env) { return env.records_price() ? Binning::kNearest : Binning::kExact; }

// ---------------------------------------------------------------------------
// Folds and losses

FoldPlan split_5x2(std::size_t observations, std::uint64_t seed) {
  if (observations < 2) throw DataError("5x2 split needs at least 2 observations");
  FoldPlan plan;
  plan.seed = seed;
  plan.observations = observations;
  const std::size_t first = (observations + 1) / 2;
  for (int r = 0; r < FoldPlan::kRepetitions; ++r) {
    std::vector<int> idx(observations);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, r));
    std::shuffle(idx.begin(), idx.end(), rng);
    plan.halves[r][0].assign(idx.begin(), idx.begin() + first);
    plan.halves[r][1].assign(idx.begin() + first, idx.end());
    std::sort(plan.halves[r][0].begin(), plan.halves[r][0].end());
    std::sort(plan.halves[r][1].begin(), plan.halves[r][1].end());
  }
  return plan;
}

double mse(const VectorXd& simulated, const VectorXd& empirical) {
  if (simulated.size() != empirical.size() || simulated.size() == 0)
    throw DimensionError("histogram lengths differ: " + std::to_string(simulated.size()) + " vs " +
                         std::to_string(empirical.size()));
  return (simulated - empirical).squaredNorm() / static_cast<double>(simulated.size());
}

// ---------------------------------------------------------------------------
// Grid search

Grid Grid::parse(const std::string& text) {
  Grid g;
  std::istringstream in(text);
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw ConfigError("grid entry '" + token + "' is not key=v1,v2,...");
    const std::string key = token.substr(0, eq);
    auto values = parse_double_list(key, token.substr(eq + 1));
    if (values.empty()) throw ConfigError("grid entry '" + key + "' has no values");
    for (double v : values)
      if (v < 0) throw ConfigError("grid entry '" + key + "' has a negative value");
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (key == "mu")
      g.mu_values = std::move(values);
    else if (key == "sigma_star")
      g.sigma_star_values = std::move(values);
    else
      throw ConfigError("unknown grid key '" + key + "' (expected mu or sigma_star)");
  }
  return g;
}

Cell Grid::cell(std::size_t index) const {
  if (index >= size()) throw ConfigError("grid cell index out of range");
  return {mu_values[mu_index(index)], sigma_star_values[sigma_index(index)]};
}

int default_sim_episodes(const Environment& env) {
  const int per_episode = env.records_price() ? env.horizon() : env.num_agents() * env.horizon();
  return std::max(1, (4000 + per_episode - 1) / per_episode);
}

Checkpoint train_checkpoint(const Environment& env, const Cell& cell, const TrainingConfig& training) {
  Checkpoint c;
  c.mu = cell.mu;
  c.sigma_star = cell.sigma_star;
  c.seed = training.seed;
  c.env = env.describe();
  const Population pop{c.supertype(env.role())};
  c.policy = train(env, pop, training).policy;
  return c;
}

std::string PolicyCache::key(const Environment& env, const Cell& cell, std::uint64_t seed) const {
  std::ostringstream os;
  os << env.name() << '-' << std::hex << std::setw(8) << std::setfill('0')
     << (fnv1a(env.describe().to_string()) & 0xffffffffu) << std::dec << "-mu" << cell.mu << "-ss" << cell.sigma_star
     << "-s" << seed;
  return os.str();
}

std::shared_ptr<const Checkpoint> PolicyCache::get_or_train(const Environment& env, const Cell& cell,
                                                            std::uint64_t seed, const TrainingConfig& training) {
  const std::string k = key(env, cell, seed) + "-" + hexf(fnv1a(training.describe().to_string()));
  std::promise<std::shared_ptr<const Checkpoint>> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(k); it != entries_.end()) {
      auto fut = it->second;
      lock.unlock();
      return fut.get();
    }
    entries_.emplace(k, promise.get_future().share());
  }
  try {
    std::shared_ptr<const Checkpoint> result;
    const std::string path = directory_.empty() ? std::string() : directory_ + "/" + key(env, cell, seed) + ".ckpt";
    if (!path.empty() && std::filesystem::exists(path)) {
      result = std::make_shared<const Checkpoint>(load_checkpoint(path));
    } else {
      TrainingConfig t = training;
      t.seed = seed;
      result = std::make_shared<const Checkpoint>(train_checkpoint(env, cell, t));
      if (!path.empty()) {
        std::filesystem::create_directories(directory_);
        save_checkpoint(path, *result);
      }
      ++trained_;
    }
    promise.set_value(result);
    return result;
  } catch (...) {
    promise.set_exception(std::current_exception());
    throw;
  }
}

std::vector<double> recorded_values(const Environment& env, const RolloutBatch& batch) {
  std::vector<double> out;
  out.reserve(batch.size());
  const ActionSpace& space = env.action_space();
  for (const auto& t : batch.transitions) {
    if (env.records_price()) {
      if (t.agent == 0) out.push_back(t.price);
    } else {
      out.push_back(space.value(t.action));
    }
  }
  return out;
}

VectorXd simulate_distribution(const PolicyParameters& policy, const Environment& env, const Supertype& st,
                               int n_episodes, std::uint64_t seed) {
  check_compatible(policy, env);
  if (n_episodes < 1) throw ConfigError("simulation needs at least one episode");
  Rng rng(seed);
  const RolloutBatch batch = collect_episodes(env, policy, Population{st}, n_episodes, KlMode::kExact, rng);
  const auto values = recorded_values(env, batch);
  return histogram(values, env.record_grid(), binning_for(env));
}

VectorXd simulate_distribution(const Checkpoint& ckpt, const Environment& env, const Supertype& st, int n_episodes,
                               std::uint64_t seed) {
  return simulate_distribution(ckpt.policy, env, st, n_episodes, seed);
}

std::uint64_t cell_seed(std::uint64_t base, int repetition, std::size_t cell_index) {
  return derive_seed(base, repetition, cell_index);
}

namespace {

CellSimulation simulate_cell(const Environment& env, const Grid& grid, const CalibrationSettings& settings,
                             int repetition, std::size_t index, PolicyCache& cache) {
  CellSimulation sim;
  sim.seed = cell_seed(settings.seed, repetition, index);
  try {
    const Cell cell = grid.cell(index);
    const auto ckpt = cache.get_or_train(env, cell, sim.seed, settings.training);
    const int episodes = settings.sim_episodes > 0 ? settings.sim_episodes : default_sim_episodes(env);
    sim.histogram = simulate_distribution(*ckpt, env, ckpt->supertype(env.role()), episodes, derive_seed(sim.seed, 9));
    std::ostringstream os;
    os << env.name() << "-mu" << cell.mu << "-ss" << cell.sigma_star << "-s" << sim.seed;
    sim.checkpoint = os.str();
  } catch (const DimensionError&) {
    throw;
  } catch (const std::exception& e) {
    sim.histogram.reset();
    sim.error = e.what();
  }
  return sim;
}

}  // namespace

std::vector<CellSimulation> simulate_grid(const Environment& env, const Grid& grid, const CalibrationSettings& settings,
                                          int repetition, PolicyCache& cache) {
  std::vector<CellSimulation> sims(grid.size());
  parallel_for(grid.size(), settings.jobs,
               [&](std::size_t i) { sims[i] = simulate_cell(env, grid, settings, repetition, i, cache); });
  return sims;
}

GridSearchResult select_cell(const Grid& grid, const std::vector<CellSimulation>& sims, const VectorXd& train_hist) {
  if (sims.size() != grid.size()) throw DimensionError("one simulation per grid cell expected");
  GridSearchResult out;
  bool found = false;
  double best = 0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    CellResult r;
    r.cell = grid.cell(i);
    r.seed = sims[i].seed;
    r.checkpoint = sims[i].checkpoint;
    if (!sims[i].histogram) {
      r.ok = false;
      r.error = sims[i].error;
    } else {
      r.train_mse = mse(*sims[i].histogram, train_hist);
      // grid order is (mu, sigma_star) ascending, so strict < keeps the smaller cell on ties
      if (!found || r.train_mse < best) {
        found = true;
        best = r.train_mse;
        out.best_index = i;
        out.best = r.cell;
      }
    }
    out.cells.push_back(std::move(r));
  }
  if (!found) throw ConvergenceError("every grid cell failed to train");
  return out;
}

GridSearchResult grid_search(const Environment& env, const VectorXd& train_hist, const Grid& grid,
                             const CalibrationSettings& settings, int repetition, PolicyCache& cache) {
  return select_cell(grid, simulate_grid(env, grid, settings, repetition, cache), train_hist);
}

double evaluate(const VectorXd& simulated, const EmpiricalDataset& data, std::span<const int> train_indices,
                std::span<const int> test_indices, const ActionSpace& grid, Binning rule) {
  std::vector<char> seen(data.size(), 0);
  for (int i : train_indices)
    if (i >= 0 && static_cast<std::size_t>(i) < seen.size()) seen[i] = 1;
  for (int i : test_indices)
    if (i >= 0 && static_cast<std::size_t>(i) < seen.size() && seen[i])
      throw DataError("fold overlap: observation " + std::to_string(i) + " is in both halves");
  const auto values = data.values(test_indices);
  return std::sqrt(mse(simulated, histogram(values, grid, rule)));
}

CalibrationReport calibrate(const Environment& env, const EmpiricalDataset& data, const Grid& grid,
                            const CalibrationSettings& settings, PolicyCache& cache) {
  if (data.env != env.name())
    throw DataError("dataset is tagged '" + data.env + "' but the environment is '" + env.name() + "'");
  const ActionSpace bins = env.record_grid();
  const Binning rule = binning_for(env);
  histogram(data.values(), bins, rule);

  CalibrationReport rep;
  rep.env = env.name();
  rep.grid = grid;
  rep.plan = split_5x2(data.size(), settings.seed);

  const std::size_t cells = grid.size();
  std::vector<CellSimulation> sims(FoldPlan::kRepetitions * cells);
  parallel_for(sims.size(), settings.jobs, [&](std::size_t task) {
    sims[task] = simulate_cell(env, grid, settings, static_cast<int>(task / cells), task % cells, cache);
  });

  std::vector<double> rmses;
  for (int r = 0; r < FoldPlan::kRepetitions; ++r) {
    const std::vector<CellSimulation> rep_sims(sims.begin() + r * cells, sims.begin() + (r + 1) * cells);
    for (int f = 0; f < 2; ++f) {
      const auto& train_idx = rep.plan.train(r, f);
      const auto& test_idx = rep.plan.test(r, f);
      const VectorXd train_hist = histogram(data.values(train_idx), bins, rule);
      GridSearchResult gs = select_cell(grid, rep_sims, train_hist);
      for (std::size_t i = 0; i < cells; ++i) {
        CellResult& c = gs.cells[i];
        c.repetition = r;
        c.fold = f;
        if (c.ok) c.test_rmse = evaluate(*rep_sims[i].histogram, data, train_idx, test_idx, bins, rule);
        rep.cells.push_back(c);
      }
      const CellResult& best = gs.cells[gs.best_index];
      rep.folds.push_back({r, f, best.cell, best.train_mse, best.test_rmse});
      rmses.push_back(best.test_rmse);
    }
  }
  const double n = static_cast<double>(rmses.size());
  rep.rmse_mean = std::accumulate(rmses.begin(), rmses.end(), 0.0) / n;
  double ss = 0;
  for (double v : rmses) ss += (v - rep.rmse_mean) * (v - rep.rmse_mean);
  rep.rmse_std = std::sqrt(ss / (n - 1));
  return rep;
}

std::string CalibrationReport::cells_csv() const {
  std::ostringstream os;
  os << "repetition,fold,mu,sigma_star,seed,status,train_mse,test_rmse,selected,checkpoint\n";
  for (const auto& c : cells) {
    const bool selected = c.ok && folds[c.repetition * 2 + c.fold].best == c.cell;
    os << c.repetition << ',' << c.fold << ',' << fmt(c.cell.mu) << ',' << fmt(c.cell.sigma_star) << ',' << c.seed
       << ',' << (c.ok ? "ok" : "failed") << ',' << (c.ok ? fmt(c.train_mse) : "") << ','
       << (c.ok ? fmt(c.test_rmse) : "") << ',' << (selected ? 1 : 0) << ',' << c.checkpoint << '\n';
  }
  return os.str();
}

std::string CalibrationReport::folds_csv() const {
  std::ostringstream os;
  os << "repetition,fold,mu,sigma_star,train_mse,test_rmse\n";
  for (const auto& f : folds)
    os << f.repetition << ',' << f.fold << ',' << fmt(f.best.mu) << ',' << fmt(f.best.sigma_star) << ','
       << fmt(f.train_mse) << ',' << fmt(f.test_rmse) << '\n';
  return os.str();
}

std::string CalibrationReport::summary_csv(const std::string& model) const {
  return "env,model,rmse_mean,rmse_std\n" + env + "," + model + "," + fmt(rmse_mean) + "," + fmt(rmse_std) + "\n";
}

EmpiricalDataset synthesize_dataset(const Environment& env, const PolicyParameters& policy, const Supertype& st,
                                    int groups, int rounds, std::uint64_t seed) {
  check_compatible(policy, env);
  if (groups < 1 || rounds < 1) throw ConfigError("synthetic dataset needs groups >= 1 and rounds >= 1");
  EmpiricalDataset d;
  d.env = env.name();
  for (int g = 0; g < groups; ++g) {
    Rng rng(derive_seed(seed, g));
    const RolloutBatch batch = collect_episodes(env, policy, Population{st}, rounds, KlMode::kExact, rng);
    for (const auto& t : batch.transitions) {
      const int round = t.episode * env.horizon() + t.step;
      if (env.records_price()) {
        if (t.agent == 0) d.records.push_back({g, round, t.price});
      } else {
        d.records.push_back({g * env.num_agents() + t.agent, round, env.action_space().value(t.action)});
      }
    }
  }
  std::stable_sort(d.records.begin(), d.records.end(), [](const DecisionRecord& a, const DecisionRecord& b) {
    return a.subject != b.subject ? a.subject < b.subject : a.round < b.round;
  });
  return d;
}

// ---------------------------------------------------------------------------
// Rank tables

std::vector<RmseEntry> parse_rmse_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  std::vector<RmseEntry> out;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto where = origin + ":" + std::to_string(lineno) + ": ";
    if (!header) {
      if (line != "env,model,rmse_mean,rmse_std") throw DataError(where + "expected header env,model,rmse_mean,rmse_std");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 4) throw DataError(where + "expected 4 fields, got " + std::to_string(f.size()));
    RmseEntry e{trim(f[0]), trim(f[1])};
    if (e.env.empty() || e.model.empty()) throw DataError(where + "empty env or model");
    if (!to_double(trim(f[2]), e.mean) || e.mean < 0) throw DataError(where + "bad rmse_mean '" + f[2] + "'");
    if (!to_double(trim(f[3]), e.std) || e.std < 0) throw DataError(where + "bad rmse_std '" + f[3] + "'");
    out.push_back(e);
  }
  if (!header) throw DataError(origin + ": empty RMSE table");
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

RankTable rank_models(const std::vector<RmseEntry>& entries, const std::map<std::string, double>& weights) {
  RankTable t;
  for (const auto& e : entries) {
    if (std::find(t.envs.begin(), t.envs.end(), e.env) == t.envs.end()) t.envs.push_back(e.env);
    if (std::find(t.models.begin(), t.models.end(), e.model) == t.models.end()) t.models.push_back(e.model);
  }
  if (t.envs.empty()) throw DataError("rank table needs at least one environment");
  const auto E = static_cast<Eigen::Index>(t.envs.size());
  const auto M = static_cast<Eigen::Index>(t.models.size());
  t.mean = MatrixXd::Constant(E, M, std::nan(""));
  t.std = MatrixXd::Constant(E, M, std::nan(""));
  for (const auto& e : entries) {
    const auto r = std::find(t.envs.begin(), t.envs.end(), e.env) - t.envs.begin();
    const auto c = std::find(t.models.begin(), t.models.end(), e.model) - t.models.begin();
    if (!std::isnan(t.mean(r, c))) throw DataError("duplicate RMSE cell " + e.env + "/" + e.model);
    t.mean(r, c) = e.mean;
    t.std(r, c) = e.std;
  }
  for (Eigen::Index r = 0; r < E; ++r)
    for (Eigen::Index c = 0; c < M; ++c)
      if (std::isnan(t.mean(r, c))) throw DataError("missing RMSE cell " + t.envs[r] + "/" + t.models[c]);

  for (const auto& [env, w] : weights) {
    if (std::find(t.envs.begin(), t.envs.end(), env) == t.envs.end())
      throw ConfigError("weight given for unknown environment '" + env + "'");
    if (!(w > 0 && w <= 1)) throw ConfigError("weight for '" + env + "' is " + fmt(w) + "; weights must lie in (0, 1]");
  }
  t.weights.resize(E);
  for (Eigen::Index r = 0; r < E; ++r) {
    const auto it = weights.find(t.envs[r]);
    t.weights[r] = it == weights.end() ? 1.0 : it->second;
  }

  t.ranks.resize(E, M);
  for (Eigen::Index r = 0; r < E; ++r) {
    const VectorXd row = t.mean.row(r).transpose();
    const auto rk = average_ranks(std::span<const double>(row.data(), row.size()));
    for (Eigen::Index c = 0; c < M; ++c) t.ranks(r, c) = rk[c];
  }
  t.average_rank = (t.ranks.transpose() * t.weights) / t.weights.sum();
  return t;
}

std::string RankTable::to_csv() const {
  std::ostringstream os;
  os << "env,model,rmse_mean,rmse_std,rank,weight\n";
  for (std::size_t r = 0; r < envs.size(); ++r)
    for (std::size_t c = 0; c < models.size(); ++c)
      os << envs[r] << ',' << models[c] << ',' << fmt(mean(r, c)) << ',' << fmt(std(r, c)) << ',' << fmt(ranks(r, c))
         << ',' << fmt(weights[r]) << '\n';
  for (std::size_t c = 0; c < models.size(); ++c)
    os << "Rank," << models[c] << ",,," << fmt(average_rank[c]) << ",\n";
  return os.str();
}

std::string RankTable::to_text() const {
  auto rank_str = [](double r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", r);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> rows;
  rows.push_back({""});
  for (const auto& m : models) rows[0].push_back(m);
  for (std::size_t r = 0; r < envs.size(); ++r) {
    std::vector<std::string> row{envs[r]};
    for (std::size_t c = 0; c < models.size(); ++c) {
      char buf[96];
      if (std(r, c) < 0.001)
        std::snprintf(buf, sizeof buf, "%.2f ± < 0.001 (%s)", mean(r, c), rank_str(ranks(r, c)).c_str());
      else
        std::snprintf(buf, sizeof buf, "%.2f ± %.3f (%s)", mean(r, c), std(r, c), rank_str(ranks(r, c)).c_str());
      row.emplace_back(buf);
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> last{"Rank"};
  for (std::size_t c = 0; c < models.size(); ++c) last.push_back(rank_str(average_rank[c]));
  rows.push_back(std::move(last));

  // "±" is two bytes in UTF-8 but one column wide
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s)
      if ((ch & 0xC0) != 0x80) ++w;
    return w;
  };
  std::vector<std::size_t> widths(models.size() + 1, 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], width(row[c]));
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << "  ";
      os << row[c];
      if (c + 1 < row.size()) os << std::string(widths[c] - width(row[c]), ' ');
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace bounded
