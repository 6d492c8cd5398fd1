#pragma once

#include <stdexcept>
#include <string>

namespace comtrap {

/// Bad input: malformed config, out-of-range parameter, wrong frame.
/// Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Computation started but could not finish: non-convergence, instability
/// abort, boundary leak. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace comtrap
