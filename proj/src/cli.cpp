#include "bounded/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bounded/calibration.hpp"
#include "bounded/checkpoint.hpp"
#include "bounded/config.hpp"
#include "bounded/envs.hpp"
#include "bounded/equilibrium.hpp"
#include "bounded/learner.hpp"

namespace bounded {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct Manifest {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  json settings = json::object();

  void write() const {
    json j;
    j["command"] = command;
    j["config"] = config_path;
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["output_dir"] = out;
    j["tool_version"] = kToolVersion;
    j["timestamp"] = timestamp();
    j["settings"] = settings;
    write_text(fs::path(out) / "manifest.json", j.dump(2) + "\n");
  }
};

json to_json(const Config& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || errno != 0 || text[0] == '-')
    throw ConfigError(origin + ": seed must be a non-negative integer, got '" + text + "'");
  return v;
}

/// Flag, then config key `seed`, then BOUNDED_AGENTS_SEED.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const Config& cfg) {
  if (flag) return *flag;
  if (cfg.has("seed")) return parse_seed(cfg.require("seed"), "config key seed");
  if (const char* env = std::getenv("BOUNDED_AGENTS_SEED")) return parse_seed(env, "BOUNDED_AGENTS_SEED");
  throw ConfigError("missing config key: seed (pass --seed, set seed in the config, or export BOUNDED_AGENTS_SEED)");
}

Config load_config(const std::string& path, const std::vector<std::string>& sets) {
  Config cfg = path.empty() ? Config() : Config::load(path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    cfg.set(s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

void set_if(Config& cfg, const std::string& key, const std::optional<std::string>& v) {
  if (v) cfg.set(key, *v);
}

void set_if(Config& cfg, const std::string& key, const std::optional<double>& v) {
  if (v) cfg.set(key, num(*v));
}

void set_if(Config& cfg, const std::string& key, const std::optional<int>& v) {
  if (v) cfg.set(key, std::to_string(*v));
}

std::string join(const VectorXd& v, int digits = 10) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i], digits);
  return s;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> env, prior, kl_mode, profile;
  std::optional<double> mu, sigma_star;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
  std::string out = "runs/train";
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  Config cfg = load_config(a.config, a.sets);
  set_if(cfg, "env", a.env);
  set_if(cfg, "mu", a.mu);
  set_if(cfg, "sigma_star", a.sigma_star);
  set_if(cfg, "prior", a.prior);
  set_if(cfg, "kl_mode", a.kl_mode);
  set_if(cfg, "profile", a.profile);
  set_if(cfg, "iterations", a.iterations);
  const std::string env_name = cfg.require("env");
  const double mu = cfg.require_double("mu");
  const double sigma_star = cfg.require_double("sigma_star");
  const std::uint64_t seed = resolve_seed(a.seed, cfg);
  cfg.set("seed", std::to_string(seed));

  const auto env = make_environment(env_name, cfg);
  const TrainingConfig tc = TrainingConfig::from(cfg, *env);
  Checkpoint ckpt;
  ckpt.mu = mu;
  ckpt.sigma_star = sigma_star;
  ckpt.prior = PriorSpec::parse(cfg.get("prior", "uniform"));
  ckpt.seed = seed;
  ckpt.env = env->describe();
  const Supertype st = ckpt.supertype(env->role());

  const int every = std::max(1, tc.iterations / 10);
  const TrainingResult result = train(*env, {st}, tc, [&](const CurvePoint& p) {
    if (!a.quiet && ((p.iteration + 1) % every == 0 || p.iteration + 1 == tc.iterations))
      std::cerr << "iteration " << p.iteration + 1 << "/" << tc.iterations << "  utility "
                << num(p.mean_raw_utility, 6) << "  kl " << num(p.mean_kl_penalty, 4) << "\n";
  });
  ckpt.policy = result.policy;

  fs::create_directories(a.out);
  save_checkpoint((fs::path(a.out) / "checkpoint.txt").string(), ckpt);
  write_curve_csv((fs::path(a.out) / "curve.csv").string(), result.curve);

  auto probe = env->clone();
  probe->reset();
  const auto dist = policy_distribution(ckpt.policy, *probe, 0, mu, make_prior(ckpt.prior, env->action_space()));
  const int mode = greedy_action(dist);
  std::cout << "env " << env->name() << "  mu " << num(mu) << "  sigma_star " << num(sigma_star) << "  seed " << seed
            << "\n";
  std::cout << "greedy action at lambda = mu: " << num(env->action_space().value(mode), 10) << " (p = "
            << num(dist.probs[mode], 6) << ")\n";
  std::cout << "wrote " << (fs::path(a.out) / "checkpoint.txt").string() << "\n";

  Manifest m{"train", a.config, seed, a.out};
  m.settings["run"] = to_json(cfg);
  m.settings["training"] = to_json(tc.describe());
  m.write();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string checkpoint;
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> env;
  std::optional<double> mu, sigma_star;
  std::optional<int> episodes;
  std::optional<std::uint64_t> seed;
  std::string out = "runs/simulate";
  bool emit_dataset = false;
  int groups = 20;
  int rounds = 10;
};

int cmd_simulate(const SimulateArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  Config cfg = ckpt.env;
  cfg.merge(load_config(a.config, a.sets));
  set_if(cfg, "env", a.env);
  const std::uint64_t seed = resolve_seed(a.seed, cfg);
  const auto env = make_environment(cfg.require("env"), cfg);
  check_compatible(ckpt.policy, *env);
  const Supertype st(a.mu.value_or(ckpt.mu), a.sigma_star.value_or(ckpt.sigma_star), ckpt.prior, env->role());
  const int episodes = a.episodes.value_or(default_sim_episodes(*env));
  if (episodes < 1) throw ConfigError("episodes must be >= 1");

  Rng rng(seed);
  const RolloutBatch batch = collect_episodes(*env, ckpt.policy, {st}, episodes, KlMode::kExact, rng);
  const ActionSpace bins = env->record_grid();
  const VectorXd hist = histogram(recorded_values(*env, batch), bins, binning_for(*env));

  fs::create_directories(a.out);
  std::ostringstream h;
  h << (env->records_price() ? "price" : "action") << ",mass\n";
  for (int k = 0; k < bins.size(); ++k) h << num(bins.value(k), 10) << ',' << num(hist[k]) << '\n';
  write_text(fs::path(a.out) / "histogram.csv", h.str());

  std::ostringstream t;
  t << "episode,step,agent,lambda,action,utility,price\n";
  for (const auto& tr : batch.transitions)
    t << tr.episode << ',' << tr.step << ',' << tr.agent << ',' << num(tr.lambda) << ','
      << num(env->action_space().value(tr.action), 10) << ',' << num(tr.raw_utility) << ','
      << (std::isnan(tr.price) ? std::string() : num(tr.price)) << '\n';
  write_text(fs::path(a.out) / "trace.csv", t.str());

  if (a.emit_dataset) {
    const auto data = synthesize_dataset(*env, ckpt.policy, st, a.groups, a.rounds, derive_seed(seed, 1));
    data.save_csv((fs::path(a.out) / "dataset.csv").string());
    std::cout << "dataset: " << data.size() << " observations\n";
  }

  int mode = 0;
  hist.maxCoeff(&mode);
  std::cout << "env " << env->name() << "  episodes " << episodes << "  modal bin " << num(bins.value(mode), 10)
            << " (mass " << num(hist[mode], 6) << ")\n";
  if (batch.floored_prices > 0)
    std::cout << "note: price floored at 0 in " << batch.floored_prices << " of " << batch.episodes * env->horizon()
              << " steps\n";

  Manifest m{"simulate", a.config, seed, a.out};
  m.settings["checkpoint"] = a.checkpoint;
  m.settings["episodes"] = episodes;
  m.settings["mu"] = st.mu();
  m.settings["sigma_star"] = st.sigma_star();
  m.settings["env"] = to_json(env->describe());
  m.settings["floored_prices"] = batch.floored_prices;
  m.write();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CalibrateArgs {
  std::string data;
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::string> env, grid, profile, kl_mode;
  std::optional<int> iterations;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  int sim_episodes = 0;
  std::string cache_dir;
  std::string out = "runs/calibrate";
  std::string model = "proposed";
};

int cmd_calibrate(const CalibrateArgs& a) {
  const EmpiricalDataset data = EmpiricalDataset::load_csv(a.data);
  Config cfg = load_config(a.config, a.sets);
  set_if(cfg, "env", a.env);
  set_if(cfg, "grid", a.grid);
  set_if(cfg, "profile", a.profile);
  set_if(cfg, "kl_mode", a.kl_mode);
  set_if(cfg, "iterations", a.iterations);
  if (!cfg.has("env")) cfg.set("env", data.env);
  const std::uint64_t seed = resolve_seed(a.seed, cfg);
  cfg.set("seed", std::to_string(seed));
  if (a.jobs < 1) throw ConfigError("--jobs must be >= 1");

  const auto env = make_environment(cfg.require("env"), cfg);
  const Grid grid = Grid::parse(cfg.get("grid", ""));
  CalibrationSettings settings;
  settings.training = TrainingConfig::from(cfg, *env);
  settings.sim_episodes = cfg.get_int("sim_episodes", a.sim_episodes);
  settings.jobs = a.jobs;
  settings.seed = seed;
  settings.cache_dir = a.cache_dir;

  PolicyCache cache(a.cache_dir);
  const CalibrationReport rep = calibrate(*env, data, grid, settings, cache);

  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "cells.csv", rep.cells_csv());
  write_text(fs::path(a.out) / "folds.csv", rep.folds_csv());
  write_text(fs::path(a.out) / "rmse_summary.csv", rep.summary_csv(a.model));

  std::cout << "env " << rep.env << "  observations " << data.size() << "  grid " << grid.mu_values.size() << "x"
            << grid.sigma_star_values.size() << "  policies trained " << cache.trained() << "\n";
  for (const auto& f : rep.folds)
    std::cout << "rep " << f.repetition << " fold " << f.fold << ": mu " << num(f.best.mu, 6) << "  sigma_star "
              << num(f.best.sigma_star, 6) << "  train mse " << num(f.train_mse, 6) << "  test rmse "
              << num(f.test_rmse, 6) << "\n";
  std::cout << "test rmse " << num(rep.rmse_mean, 6) << " +- " << num(rep.rmse_std, 6) << "\n";
  int failed = 0;
  for (const auto& c : rep.cells) failed += c.ok ? 0 : 1;
  if (failed > 0) std::cout << "note: " << failed << " cell evaluations excluded after training failures\n";

  Manifest m{"calibrate", a.config, seed, a.out};
  m.settings["data"] = a.data;
  m.settings["run"] = to_json(cfg);
  m.settings["training"] = to_json(settings.training.describe());
  m.settings["jobs"] = a.jobs;
  m.write();
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
  std::string config;
  std::vector<std::string> sets;
  std::string game = "rps";
  std::string payoffs;
  double lambda = 1.0;
  double tol = 1e-10;
  int max_iter = 100000;
  double damping = 0.5;
  std::string env = "cournot_duopoly";
};

int cmd_qre(const OracleArgs& a) {
  MatrixGame game = MatrixGame::by_name(a.game);
  if (!a.payoffs.empty()) {
    if (a.game != "bandit") throw ConfigError("--payoffs applies to --game bandit only");
    const auto u = parse_double_list("payoffs", a.payoffs);
    game = MatrixGame::bandit(Eigen::Map<const VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())));
  }
  if (!(a.lambda > 0)) throw ConfigError("--lambda must be > 0, got " + num(a.lambda));
  if (!(a.damping > 0 && a.damping <= 1)) throw ConfigError("--damping must lie in (0, 1]");
  if (a.max_iter < 1) throw ConfigError("--max-iter must be >= 1");
  QreOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  opts.damping = a.damping;
  const QreSolution sol = logit_qre(game, a.lambda, opts);
  std::cout << "game " << game.name() << "  lambda " << num(a.lambda) << "\n";
  for (std::size_t i = 0; i < sol.strategies.size(); ++i)
    std::cout << "player " << i << ": " << join(sol.strategies[i]) << "\n";
  std::cout << "iterations " << sol.iterations << "  residual " << num(sol.residual, 3) << "\n";
  return kExitOk;
}

int cmd_nash(const OracleArgs& a) {
  Config cfg = load_config(a.config, a.sets);
  const auto env = make_environment(a.env, cfg);
  const Config d = env->describe();
  int q = 0;
  if (a.env == "supply_chain") {
    q = supply_chain_nash(SupplyChainConfig::from(d.section("supply_chain.")));
  } else if (a.env == "cournot_duopoly" || a.env == "cournot_triopoly") {
    q = cournot_nash(CournotConfig::from(d.section("cournot."), env->num_agents()));
  } else {
    throw ConfigError("nash oracle supports supply_chain, cournot_duopoly and cournot_triopoly, not '" + a.env + "'");
  }
  std::cout << "env " << env->name() << "  symmetric Nash action per agent: " << q << "\n";
  return kExitOk;
}

int cmd_cobweb_star(const OracleArgs& a) {
  Config cfg = load_config(a.config, a.sets);
  const auto env = make_environment("cobweb", cfg);
  const CobwebConfig c = CobwebConfig::from(env->describe().section("cobweb."));
  const double p = cobweb_rational_price(c);
  std::cout << "rational expectations price " << num(p) << "\n";
  std::cout << "residual " << num(std::abs(cobweb_excess_demand(c, p)), 3) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct RankArgs {
  std::string input;
  std::string weights;
  std::string out;
};

std::map<std::string, double> parse_weights(const std::string& text, const std::vector<RmseEntry>& entries) {
  std::map<std::string, double> out;
  if (text.empty()) return out;
  std::vector<std::string> envs;
  for (const auto& e : entries)
    if (std::find(envs.begin(), envs.end(), e.env) == envs.end()) envs.push_back(e.env);
  if (text.find('=') == std::string::npos) {
    const auto w = parse_double_list("weights", text);
    if (w.size() != envs.size())
      throw ConfigError("--weights lists " + std::to_string(w.size()) + " values for " + std::to_string(envs.size()) +
                        " environments");
    for (std::size_t i = 0; i < w.size(); ++i) out[envs[i]] = w[i];
    return out;
  }
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--weights entry '" + item + "' is not env=weight");
    out[item.substr(0, eq)] = parse_double("weights", item.substr(eq + 1));
  }
  return out;
}

int cmd_rank(const RankArgs& a) {
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw DataError("cannot open " + a.input);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto entries = parse_rmse_csv(ss.str(), a.input);
  const RankTable table = rank_models(entries, parse_weights(a.weights, entries));
  std::cout << table.to_text();
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "rank.csv", table.to_csv());
    write_text(fs::path(a.out) / "rank.txt", table.to_text());
    Manifest m{"rank", "", std::nullopt, a.out};
    m.settings["input"] = a.input;
    m.settings["weights"] = a.weights;
    m.write();
  }
  return kExitOk;
}

template <class Fn>
int guarded(Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << "\n";
    return kExitDimension;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Bounded-rational multi-agent simulation and calibration"};
  app.set_version_flag("--version", std::string("bounded-agents ") + kToolVersion);
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a shared supertype policy");
  train_cmd->add_option("--config", ta.config, "key = value config file");
  train_cmd->add_option("--set", ta.sets, "Override a config key (key=value)");
  train_cmd->add_option("--env", ta.env, "Environment name");
  train_cmd->add_option("--mu", ta.mu, "Mean processing cost");
  train_cmd->add_option("--sigma-star", ta.sigma_star, "Relative spread of the processing cost");
  train_cmd->add_option("--prior", ta.prior, "uniform or prominent[:boost]");
  train_cmd->add_option("--kl-mode", ta.kl_mode, "exact, per_action or none");
  train_cmd->add_option("--profile", ta.profile, "desk or full");
  train_cmd->add_option("--iterations", ta.iterations, "Training iterations");
  train_cmd->add_option("--seed", ta.seed, "Random seed");
  train_cmd->add_option("--out", ta.out, "Output directory");
  train_cmd->add_flag("--quiet", ta.quiet, "No progress output");

  SimulateArgs sa;
  auto* sim_cmd = app.add_subcommand("simulate", "Roll out a trained policy");
  sim_cmd->add_option("--checkpoint", sa.checkpoint, "Checkpoint file")->required();
  sim_cmd->add_option("--config", sa.config, "Environment overrides");
  sim_cmd->add_option("--set", sa.sets, "Override a config key (key=value)");
  sim_cmd->add_option("--env", sa.env, "Simulate in a different environment");
  sim_cmd->add_option("--mu", sa.mu, "Override the checkpoint's mu");
  sim_cmd->add_option("--sigma-star", sa.sigma_star, "Override the checkpoint's sigma_star");
  sim_cmd->add_option("--episodes", sa.episodes, "Episodes to roll out");
  sim_cmd->add_option("--seed", sa.seed, "Random seed");
  sim_cmd->add_option("--out", sa.out, "Output directory");
  sim_cmd->add_flag("--emit-dataset", sa.emit_dataset, "Also write a synthetic dataset.csv");
  sim_cmd->add_option("--groups", sa.groups, "Synthetic dataset: independent groups");
  sim_cmd->add_option("--rounds", sa.rounds, "Synthetic dataset: episodes per group");

  CalibrateArgs ca;
  auto* cal_cmd = app.add_subcommand("calibrate", "Grid search over (mu, sigma_star) with 5x2 folds");
  cal_cmd->add_option("--data", ca.data, "Dataset CSV (env,subject,round,value)")->required();
  cal_cmd->add_option("--config", ca.config, "key = value config file");
  cal_cmd->add_option("--set", ca.sets, "Override a config key (key=value)");
  cal_cmd->add_option("--env", ca.env, "Environment (default: dataset tag)");
  cal_cmd->add_option("--grid", ca.grid, "e.g. \"mu=0,1 sigma_star=0,1\"");
  cal_cmd->add_option("--profile", ca.profile, "desk or full");
  cal_cmd->add_option("--kl-mode", ca.kl_mode, "exact, per_action or none");
  cal_cmd->add_option("--iterations", ca.iterations, "Training iterations per cell");
  cal_cmd->add_option("--sim-episodes", ca.sim_episodes, "Episodes per simulated histogram");
  cal_cmd->add_option("--jobs", ca.jobs, "Worker threads");
  cal_cmd->add_option("--cache-dir", ca.cache_dir, "Directory for trained checkpoints");
  cal_cmd->add_option("--model", ca.model, "Model label in rmse_summary.csv");
  cal_cmd->add_option("--seed", ca.seed, "Random seed");
  cal_cmd->add_option("--out", ca.out, "Output directory");

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "Equilibrium oracles");
  oracle_cmd->require_subcommand(1);
  auto* qre_cmd = oracle_cmd->add_subcommand("qre", "Logit quantal response equilibrium of a matrix game");
  qre_cmd->add_option("--game", oa.game, "rps, matching_pennies, prisoners_dilemma or bandit");
  qre_cmd->add_option("--payoffs", oa.payoffs, "Bandit arm payoffs, e.g. 1,0");
  qre_cmd->add_option("--lambda", oa.lambda, "Processing cost (> 0)");
  qre_cmd->add_option("--tol", oa.tol, "Convergence tolerance");
  qre_cmd->add_option("--max-iter", oa.max_iter, "Iteration limit");
  qre_cmd->add_option("--damping", oa.damping, "Weight on the new response");
  auto* nash_cmd = oracle_cmd->add_subcommand("nash", "Symmetric Nash action");
  nash_cmd->add_option("--env", oa.env, "supply_chain, cournot_duopoly or cournot_triopoly");
  nash_cmd->add_option("--config", oa.config, "Environment overrides");
  nash_cmd->add_option("--set", oa.sets, "Override a config key (key=value)");
  auto* star_cmd = oracle_cmd->add_subcommand("cobweb-star", "Rational-expectations cobweb price");
  star_cmd->add_option("--config", oa.config, "Environment overrides");
  star_cmd->add_option("--set", oa.sets, "Override a config key (key=value)");

  RankArgs ra;
  auto* rank_cmd = app.add_subcommand("rank", "Rank models by RMSE per environment");
  rank_cmd->add_option("--input", ra.input, "CSV env,model,rmse_mean,rmse_std")->required();
  rank_cmd->add_option("--weights", ra.weights, "env=w,... or one weight per environment in file order");
  rank_cmd->add_option("--out", ra.out, "Output directory for rank.csv and rank.txt");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*train_cmd) return guarded([&] { return cmd_train(ta); });
  if (*sim_cmd) return guarded([&] { return cmd_simulate(sa); });
  if (*cal_cmd) return guarded([&] { return cmd_calibrate(ca); });
  if (*qre_cmd) return guarded([&] { return cmd_qre(oa); });
  if (*nash_cmd) return guarded([&] { return cmd_nash(oa); });
  if (*star_cmd) return guarded([&] { return cmd_cobweb_star(oa); });
  if (*rank_cmd) return guarded([&] { return cmd_rank(ra); });
  return kExitConfig;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage{"bounded-agents"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  argv.push_back(nullptr);
  return run_cli(static_cast<int>(storage.size()), argv.data());
}

}  // namespace bounded
