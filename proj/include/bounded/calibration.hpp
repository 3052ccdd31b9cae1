#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bounded/checkpoint.hpp"
#include "bounded/core.hpp"
#include "bounded/envs.hpp"
#include "bounded/learner.hpp"
#include "bounded/policy.hpp"

namespace bounded {

// ---------------------------------------------------------------------------
// Datasets

struct DecisionRecord {
  int subject = 0;
  int round = 0;
  double value = 0;  // a decision, or a realized price for the cobweb market
};

/// Recorded decisions for one environment. CSV header: `env,subject,round,value`.
struct EmpiricalDataset {
  std::string env;
  std::vector<DecisionRecord> records;

  std::size_t size() const { return records.size(); }
  std::vector<double> values() const;
  std::vector<double> values(std::span<const int> indices) const;

  static EmpiricalDataset parse_csv(const std::string& text, const std::string& origin = "<string>");
  static EmpiricalDataset load_csv(const std::string& path);
  std::string to_csv() const;
  void save_csv(const std::string& path) const;
};

enum class Binning {
  kExact,    // values must lie on the grid
  kNearest,  // values are rounded to the nearest grid point, clamped at the ends
};

/// Probability mass per grid bin. Throws DataError for off-grid values under kExact.
VectorXd histogram(std::span<const double> values, const ActionSpace& grid, Binning rule);

/// Binning rule for an environment's calibration records.
Binning binning_for(const Environment& env);

// ---------------------------------------------------------------------------
// Folds and losses

/// Five independent shuffles of the observation indices, each cut into two halves.
struct FoldPlan {
  static constexpr int kRepetitions = 5;
  std::uint64_t seed = 0;
  std::size_t observations = 0;
  std::array<std::array<std::vector<int>, 2>, kRepetitions> halves;

  /// Fold f of repetition r trains on halves[r][f] and tests on halves[r][1 - f].
  const std::vector<int>& train(int r, int f) const { return halves[r][f]; }
  const std::vector<int>& test(int r, int f) const { return halves[r][1 - f]; }
};

FoldPlan split_5x2(std::size_t observations, std::uint64_t seed);

/// Mean over bins of the squared mass difference.
double mse(const VectorXd& simulated, const VectorXd& empirical);

// ---------------------------------------------------------------------------
// Grid search

struct Cell {
  double mu = 0;
  double sigma_star = 0;
  bool operator==(const Cell&) const = default;
};

struct Grid {
  std::vector<double> mu_values = {0, 0.25, 0.5, 1, 2.5, 5, 10};
  std::vector<double> sigma_star_values = {0, 0.05, 0.1, 0.25, 0.5, 1};

  static Grid standard() { return {}; }
  /// Parses e.g. "mu=0,1 sigma_star=0,0.5"; either part may be omitted (falls back to the defaults).
  static Grid parse(const std::string& text);

  std::size_t size() const { return mu_values.size() * sigma_star_values.size(); }
  /// Cells ordered by mu, then sigma_star.
  Cell cell(std::size_t index) const;
  std::size_t mu_index(std::size_t index) const { return index / sigma_star_values.size(); }
  std::size_t sigma_index(std::size_t index) const { return index % sigma_star_values.size(); }
};

/// Training and simulation budget for one calibration run.
struct CalibrationSettings {
  TrainingConfig training;  // its seed is replaced per cell
  int sim_episodes = 0;     // 0: about 4000 recorded values per simulated histogram
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string cache_dir;  // empty: in-memory cache only
};

int default_sim_episodes(const Environment& env);

/// Trained policies keyed by (environment, cell, seed); optionally mirrored to disk.
class PolicyCache {
 public:
  explicit PolicyCache(std::string directory = {}) : directory_(std::move(directory)) {}

  std::shared_ptr<const Checkpoint> get_or_train(const Environment& env, const Cell& cell, std::uint64_t seed,
                                                 const TrainingConfig& training);
  std::size_t trained() const { return trained_; }

 private:
  std::string key(const Environment& env, const Cell& cell, std::uint64_t seed) const;

  std::string directory_;
  std::mutex mutex_;
  std::map<std::string, std::shared_future<std::shared_ptr<const Checkpoint>>> entries_;
  std::atomic<std::size_t> trained_{0};
};

Checkpoint train_checkpoint(const Environment& env, const Cell& cell, const TrainingConfig& training);

/// Frozen-policy rollouts with lambda_i resampled per episode; decisions (or realized prices) binned
/// on the environment's record grid.
VectorXd simulate_distribution(const PolicyParameters& policy, const Environment& env, const Supertype& st,
                               int n_episodes, std::uint64_t seed);
VectorXd simulate_distribution(const Checkpoint& ckpt, const Environment& env, const Supertype& st, int n_episodes,
                               std::uint64_t seed);

/// Values recorded by rollouts: per-agent decisions, or one realized price per step.
std::vector<double> recorded_values(const Environment& env, const RolloutBatch& batch);

struct CellResult {
  Cell cell;
  int repetition = 0;
  int fold = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;  // why the cell was excluded
  double train_mse = 0;
  double test_rmse = 0;
  std::string checkpoint;  // cache key
};

struct GridSearchResult {
  Cell best;
  std::size_t best_index = 0;
  std::vector<CellResult> cells;  // one per grid cell, in grid order
};

/// Simulated histogram (or the failure) for every grid cell of one repetition.
struct CellSimulation {
  std::optional<VectorXd> histogram;
  std::string error;
  std::uint64_t seed = 0;
  std::string checkpoint;
};

std::uint64_t cell_seed(std::uint64_t base, int repetition, std::size_t cell_index);

std::vector<CellSimulation> simulate_grid(const Environment& env, const Grid& grid, const CalibrationSettings& settings,
                                          int repetition, PolicyCache& cache);

/// Argmin of training MSE over completed cells; ties go to the smaller mu, then the smaller sigma_star.
GridSearchResult select_cell(const Grid& grid, const std::vector<CellSimulation>& sims, const VectorXd& train_hist);

GridSearchResult grid_search(const Environment& env, const VectorXd& train_hist, const Grid& grid,
                             const CalibrationSettings& settings, int repetition, PolicyCache& cache);

/// Test RMSE of a simulated histogram against the held-out half only. Throws DataError if the folds overlap.
double evaluate(const VectorXd& simulated, const EmpiricalDataset& data, std::span<const int> train_indices,
                std::span<const int> test_indices, const ActionSpace& grid, Binning rule);

struct FoldOutcome {
  int repetition = 0;
  int fold = 0;
  Cell best;
  double train_mse = 0;
  double test_rmse = 0;
};

struct CalibrationReport {
  std::string env;
  FoldPlan plan;
  Grid grid;
  std::vector<CellResult> cells;  // repetitions x folds x grid cells
  std::vector<FoldOutcome> folds;
  double rmse_mean = 0;
  double rmse_std = 0;  // sample standard deviation over the ten folds

  std::string cells_csv() const;
  std::string folds_csv() const;
  /// One line in the rank-table input format: env,model,rmse_mean,rmse_std.
  std::string summary_csv(const std::string& model = "proposed") const;
};

/// Full 5x2 protocol: per repetition, one policy per cell is trained and simulated, then each fold
/// selects the cell with the lowest training MSE and scores it on the other half.
CalibrationReport calibrate(const Environment& env, const EmpiricalDataset& data, const Grid& grid,
                            const CalibrationSettings& settings, PolicyCache& cache);

/// Synthetic dataset produced by a frozen policy: `groups` independent groups of agents for `rounds`
/// episodes each (cobweb: one record per realized price).
EmpiricalDataset synthesize_dataset(const Environment& env, const PolicyParameters& policy, const Supertype& st,
                                    int groups, int rounds, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Rank tables

struct RmseEntry {
  std::string env;
  std::string model;
  double mean = 0;
  double std = 0;
};

std::vector<RmseEntry> parse_rmse_csv(const std::string& text, const std::string& origin = "<string>");

/// Ranks (1 = smallest) with ties given the average of the tied positions.
std::vector<double> average_ranks(std::span<const double> values);

struct RankTable {
  std::vector<std::string> envs;
  std::vector<std::string> models;
  MatrixXd mean;   // env x model
  MatrixXd std;    // env x model
  MatrixXd ranks;  // env x model
  VectorXd weights;
  VectorXd average_rank;  // weighted mean rank per model

  std::string to_csv() const;
  /// Aligned text: "mean ± std (rank)" per cell and a final weighted-rank row.
  std::string to_text() const;
};

/// Weights default to 1 for environments not listed; every weight must lie in (0, 1].
RankTable rank_models(const std::vector<RmseEntry>& entries, const std::map<std::string, double>& weights = {});

}  // namespace bounded
