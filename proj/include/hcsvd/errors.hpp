#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcsvd {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (bad shapes, bad parameters, bad files).
class InvalidInput : public Error {
public:
    using Error::Error;
};

class ConstantColumn : public InvalidInput {
public:
    explicit ConstantColumn(std::size_t column)
        : InvalidInput("column " + std::to_string(column) + " has zero variance"), column_(column) {}
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public Error {
public:
    using Error::Error;
};

class ZeroMatrix : public Error {
public:
    using Error::Error;
};

/// A cross-cluster correlation of magnitude one makes the linkage distances non-positive.
class CollinearityViolation : public Error {
public:
    using Error::Error;
};

class ThresholdExceeded : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class TooLarge : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

class NoValidCandidate : public Error {
public:
    using Error::Error;
};

class DesignInfeasible : public Error {
public:
    using Error::Error;
};

}  // namespace hcsvd
