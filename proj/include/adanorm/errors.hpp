#pragma once

#include <stdexcept>
#include <string>

namespace adanorm {

// Base class so callers can catch everything raised by this library at once.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or dimension mismatch between tensors. Message names both shapes.
struct ShapeError : Error {
    explicit ShapeError(const std::string& what) : Error(what) {}
};

// Non-finite value where a finite one is required (gradient, loss, metric).
struct NonFiniteError : Error {
    explicit NonFiniteError(const std::string& what) : Error(what) {}
};

// Invalid configuration: hyperparameters, experiment grids, CLI input.
struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Filesystem failure surfaced with the offending path.
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace adanorm
