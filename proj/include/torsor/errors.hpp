#pragma once

#include <stdexcept>
#include <string>

namespace torsor {

/// Structural or precondition violation in the input data (bad dimensions,
/// indefinite Gram, d^2 != 0, non-exact sequence, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical quantity left its supported regime (rank ambiguity,
/// dimension jump across a finite-difference stencil, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// File or parse failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace torsor
