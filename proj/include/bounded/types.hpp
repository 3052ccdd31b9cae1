#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace bounded {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Every random stream in the library is an explicit engine of this type.
using Rng = std::mt19937_64;

// Error taxonomy. The CLI maps each class to a stable exit code.

/// Invalid or missing configuration (exit 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape disagreement between a checkpoint, an observation and an environment (exit 3).
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent dataset (exit 4).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solver or training run failed to converge or produced non-finite values (exit 5).
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a base seed and a list of tags.
template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t base, Tags... tags) {
  std::uint64_t h = mix_seed(base);
  ((h = mix_seed(h ^ static_cast<std::uint64_t>(tags))), ...);
  return h;
}

}  // namespace bounded
