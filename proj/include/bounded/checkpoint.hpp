#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "bounded/config.hpp"
#include "bounded/core.hpp"
#include "bounded/envs.hpp"
#include "bounded/policy.hpp"

namespace bounded {

/// A trained policy plus everything needed to rebuild its environment and supertype.
///
/// Text format (parameters as C99 hex floats, so the round trip is exact):
///
///     bounded-agents-checkpoint 1
///     layers 27 64 64 25
///     observation_length 27
///     actions 25
///     seed 7
///     mu 0x0p+0
///     sigma_star 0x0p+0
///     prior uniform
///     env env = cournot_duopoly
///     env cournot.A = 2.4
///     ...
///     parameters 7449
///     <one hex float per line>
///     end
struct Checkpoint {
  PolicyParameters policy;
  Config env;  // Environment::describe() of the training environment
  std::uint64_t seed = 0;
  double mu = 0;
  double sigma_star = 0;
  PriorSpec prior;

  Supertype supertype(const std::string& role = "agent") const { return Supertype(mu, sigma_star, prior, role); }
  std::unique_ptr<Environment> make_env() const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text, const std::string& origin = "<string>");

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Throws DimensionError unless the policy fits the environment's observation and action sizes.
void check_compatible(const PolicyParameters& policy, const Environment& env);

}  // namespace bounded
