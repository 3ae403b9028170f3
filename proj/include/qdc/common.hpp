#pragma once

#include <stdexcept>
#include <string>

namespace qdc {

// hbar in the units used throughout: energies in ueV, times in ps.
inline constexpr double kHbarUevNs = 0.6582119;
inline constexpr double kHbarUevPs = kHbarUevNs * 1000.0;

inline constexpr double kPi = 3.14159265358979323846;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or input file; mapped to exit code 2 by the CLI.
struct ConfigError : Error {
  using Error::Error;
};

// Execution policy for the Monte Carlo kernels. Both paths run the same
// per-block code on the same substreams, so they produce identical output;
// Serial is kept as the reference implementation for tests and benchmarks.
enum class Exec { Serial, Parallel };

}  // namespace qdc
