// common.hpp — shared error types and index ranges

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dicke {

// Invalid user-supplied configuration or arguments (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numerical failure inside a solver or fit (CLI exit code 3).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested window exceeds the truncation-converged part of the spectrum (CLI exit code 4).
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Half-open index range [lo, hi) into an ascending spectrum.
struct IndexRange {
    std::size_t lo = 0;
    std::size_t hi = 0;

    std::size_t size() const { return hi > lo ? hi - lo : 0; }
    bool empty() const { return size() == 0; }
};

} // namespace dicke
