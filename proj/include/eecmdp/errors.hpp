#pragma once

#include <stdexcept>
#include <string>

namespace eecmdp {

// Bad or inconsistent configuration (unknown key, out-of-range value,
// state/action space exceeding the memory budget). CLI exit code 2.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// An iterative method exhausted its iteration budget. CLI exit code 4.
class ConvergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Numerical failure (rank-deficient channel, rejection sampler starved).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace eecmdp
