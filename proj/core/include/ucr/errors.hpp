#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ucr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A caller broke a documented precondition.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numeric evaluation produced NaN or Inf.
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `line()` is 1-based; 0 means "not line oriented".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A record references an id that does not exist.
class IntegrityError : public Error {
public:
    IntegrityError(const std::string& what, std::string id)
        : Error(what + ": '" + id + "'"), id_(std::move(id)) {}

    [[nodiscard]] const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

/// A candidate pool cannot supply the requested number of candidates.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Checkpoint written by an incompatible format version.
class IncompatibleVersionError : public Error {
public:
    using Error::Error;
};

/// Training hit a non-finite gradient.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, std::size_t step)
        : Error("step " + std::to_string(step) + ": " + what), step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace ucr
