#pragma once

#include <stdexcept>
#include <string>

namespace rmhedge {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite integrand value at a Levy node or similar.
struct NumericalDomainError : Error {
    using Error::Error;
};

struct PathBlowup : Error {
    PathBlowup(std::size_t path, double t)
        : Error("non-finite state on path " + std::to_string(path) + " at t=" + std::to_string(t)),
          path(path), t(t) {}
    std::size_t path;
    double t;
};

/// A query point lies beyond the extrapolation band of a grid.
struct DomainEscape : Error {
    using Error::Error;
};

struct SolverDiverged : Error {
    SolverDiverged(std::size_t level, double t)
        : Error("non-finite value field at level " + std::to_string(level) + " (t=" + std::to_string(t) + ")"),
          level(level), t(t) {}
    std::size_t level;
    double t;
};

struct StepTooCoarse : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace rmhedge
