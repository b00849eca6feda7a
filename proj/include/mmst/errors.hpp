#pragma once

#include <stdexcept>
#include <string>

namespace mmst {

/// Invalid parameters, malformed config files, or out-of-range indices.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Eigen-solver failure, NaN trajectories, fit non-convergence escalated to a run-level failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mmst
