#pragma once

#include <stdexcept>
#include <string>

namespace qnewton {

// Every failure the library reports derives from Error so callers can catch
// the whole family in one place (the CLI maps it to exit code 2).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class SingularMatrix : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class MissingDerivative : public Error {
public:
    using Error::Error;
};

class RegularizationFailed : public Error {
public:
    using Error::Error;
};

class LineSearchStalled : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class NotCritical : public Error {
public:
    using Error::Error;
};

// Rejected solver/CLI configuration. The message names the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace qnewton
