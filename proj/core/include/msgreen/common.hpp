#pragma once

// Shared aliases, error types and small numeric utilities used across the
// library. Everything here is deliberately header-light: <Eigen/Core> only.

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace msgreen {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// --- error taxonomy -------------------------------------------------------
//
// Invalid arguments / mismatched dimensions are programming errors and throw
// ShapeError or ArgumentError. Runtime failures (overflow, divergence,
// singular systems, rejection-sampling exhaustion, bad config files) get
// their own types so callers and the CLI can report them distinctly.

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Non-finite value produced during evaluation; carries the offending input
// point when known.
struct NumericError : std::runtime_error {
  Vec point;
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
  NumericError(const std::string& msg, Vec where)
      : std::runtime_error(msg), point(std::move(where)) {}
};

struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainError : std::runtime_error {
  long step = -1;
  TrainError(const std::string& msg, long at) : std::runtime_error(msg), step(at) {}
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- deterministic RNG helpers --------------------------------------------

// splitmix64 finalizer; used to derive independent-looking streams and
// deterministic start vectors from small integers.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform double in [0,1) with the full 53-bit mantissa. We avoid
// std::uniform_real_distribution because its output is not specified
// bit-for-bit across standard library implementations.
inline double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo,hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * u01(rng);
}

// --- misc -----------------------------------------------------------------

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ArgumentError(msg);
}

std::string version_string();

}  // namespace msgreen
