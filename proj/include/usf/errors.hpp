#pragma once

#include <stdexcept>
#include <string>

namespace usf {

// Inputs that fail a precondition throw std::invalid_argument.
// The types below mark conditions discovered while computing.

// A required root of the Laplace exponent (or of the reconstruction
// equation) does not exist in the admissible range.
struct NoRootError : std::runtime_error {
    explicit NoRootError(const std::string& what) : std::runtime_error(what) {}
};

// A rate that must be nonnegative came out below -1e-12.
struct NegativeMassError : std::runtime_error {
    explicit NegativeMassError(const std::string& what) : std::runtime_error(what) {}
};

// The requested quantity degenerates for this chain (e.g. excursion
// statistics of a chain with no downward jumps).
struct TrivialCaseError : std::runtime_error {
    explicit TrivialCaseError(const std::string& what) : std::runtime_error(what) {}
};

// A simulation was asked for without the cap it needs to terminate,
// or for an estimand with a known analytic shortcut that makes the
// run meaningless.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace usf
