#pragma once

#include <stdexcept>
#include <string>

namespace fpc {

// Bad or malformed input data (unreadable files, ragged CSV rows, ...).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure of an algorithm (degenerate scatter, non-finite values, ...).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid invocation (bad flag combinations, out-of-range options).
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fpc
