#pragma once

#include <stdexcept>
#include <string>

namespace lfk {

// Invalid user-facing configuration (bad family parameters, malformed config
// files, inadmissible model/rate combinations).  CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: shooting did not converge, scheme went unstable, ...
// CLI exit code 3.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested accuracy/scale cannot be represented on the requested grid
// (e.g. semiclassical scale under-resolved).  CLI exit code 4.
struct ResolutionError : std::runtime_error {
    explicit ResolutionError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace lfk
