/// @file errors.hpp
/// @brief Exception hierarchy shared by every solver level.
///
/// Each family maps onto one CLI exit code: configuration problems exit with 2,
/// numerical breakdowns with 3 and violated runtime invariants with 4.

#pragma once

#include <stdexcept>
#include <string>

namespace tcs {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Invalid parameters, mismatched shapes, violated preconditions.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class DimensionError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// A value left its admissible domain (theta <= 0, rho below floor, ...).
class DomainError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// NaN/Inf detection, step-size underflow, singular systems.
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

class InvariantViolation : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 4; }
};

}  // namespace tcs
