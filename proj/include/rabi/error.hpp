#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rabi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition or type invariant was violated by the caller.
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Configuration text could not be parsed or validated.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& message, std::size_t line, std::string key)
        : InvalidInput(message), line_(line), key_(std::move(key)) {}

    /// 1-based line number, 0 when the error is not tied to a line.
    std::size_t line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

/// A numerical procedure could not deliver a result at the requested accuracy.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature exhausted its panel budget before meeting tolerance.
class ConvergenceFailure : public NumericalFailure {
public:
    ConvergenceFailure(const std::string& message, double estimate, double error_bound)
        : NumericalFailure(message), estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

/// Bracket expansion never produced a sign change.
class NoRoot : public NumericalFailure {
public:
    NoRoot(const std::string& message, double lo, double hi)
        : NumericalFailure(message), lo_(lo), hi_(hi) {}

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

/// Failure of one grid point during a time sweep.
class PointFailure : public NumericalFailure {
public:
    PointFailure(const std::string& message, double t) : NumericalFailure(message), t_(t) {}

    /// Offending time in seconds.
    double t() const noexcept { return t_; }

private:
    double t_;
};

}  // namespace rabi
