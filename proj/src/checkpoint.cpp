#include "bounded/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bounded {

namespace {

constexpr const char* kMagic = "bounded-agents-checkpoint 1";

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double unhex(const std::string& s, const std::string& origin) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ConfigError(origin + ": bad number '" + s + "' in checkpoint");
  return v;
}

}  // namespace

std::unique_ptr<Environment> Checkpoint::make_env() const { return make_environment(env.require("env"), env); }

void check_compatible(const PolicyParameters& policy, const Environment& env) {
  const ObservationLayout layout{env.feature_size(), env.action_space().size()};
  if (policy.inputs() != layout.size() || policy.outputs() != layout.actions) {
    std::ostringstream os;
    os << "checkpoint policy has " << policy.inputs() << " inputs / " << policy.outputs() << " actions but "
       << env.name() << " needs " << layout.size() << " / " << layout.actions;
    throw DimensionError(os.str());
  }
}

std::string serialize_checkpoint(const Checkpoint& c) {
  std::ostringstream os;
  os << kMagic << "\n";
  os << "layers";
  for (int w : c.policy.shape().layers) os << ' ' << w;
  os << "\nobservation_length " << c.policy.inputs() << "\n";
  os << "actions " << c.policy.outputs() << "\n";
  os << "seed " << c.seed << "\n";
  os << "mu " << hex(c.mu) << "\n";
  os << "sigma_star " << hex(c.sigma_star) << "\n";
  os << "prior " << c.prior.to_string() << "\n";
  for (const auto& [k, v] : c.env.entries()) os << "env " << k << " = " << v << "\n";
  const VectorXd& p = c.policy.parameters();
  os << "parameters " << p.size() << "\n";
  for (Eigen::Index i = 0; i < p.size(); ++i) os << hex(p[i]) << "\n";
  os << "end\n";
  return os.str();
}

Checkpoint parse_checkpoint(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw ConfigError(origin + ": not a checkpoint file");
  Checkpoint c;
  NetworkShape shape;
  int obs_len = -1;
  int actions = -1;
  bool done = false;
  std::string env_text;
  while (!done && std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "layers") {
      int w;
      while (ls >> w) shape.layers.push_back(w);
    } else if (key == "observation_length") {
      ls >> obs_len;
    } else if (key == "actions") {
      ls >> actions;
    } else if (key == "seed") {
      ls >> c.seed;
    } else if (key == "mu") {
      std::string v;
      ls >> v;
      c.mu = unhex(v, origin);
    } else if (key == "sigma_star") {
      std::string v;
      ls >> v;
      c.sigma_star = unhex(v, origin);
    } else if (key == "prior") {
      std::string v;
      ls >> v;
      c.prior = PriorSpec::parse(v);
    } else if (key == "env") {
      env_text += line.substr(4) + "\n";
    } else if (key == "parameters") {
      long n = -1;
      ls >> n;
      if (n < 0) throw ConfigError(origin + ": bad parameter count");
      VectorXd p(n);
      for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line)) throw ConfigError(origin + ": truncated parameter block");
        p[i] = unhex(line, origin);
      }
      if (shape.layers.empty()) throw ConfigError(origin + ": parameters before layers");
      c.policy = PolicyParameters(shape, std::move(p));
    } else if (key == "end") {
      done = true;
    } else if (!key.empty()) {
      throw ConfigError(origin + ": unknown checkpoint field '" + key + "'");
    }
  }
  if (!done) throw ConfigError(origin + ": missing 'end' marker");
  if (c.policy.parameters().size() == 0) throw ConfigError(origin + ": no parameters");
  if (obs_len != c.policy.inputs() || actions != c.policy.outputs())
    throw DimensionError(origin + ": header sizes disagree with the layer list");
  c.env = Config::parse(env_text, origin);
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << serialize_checkpoint(ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str(), path);
}

}  // namespace bounded
