#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dapm {

/// A caller-supplied value violates an operation's precondition.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed input data. `row()` is the 1-based line in the source file, or 0 when not applicable.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& message, std::size_t row = 0)
        : std::runtime_error(row ? "row " + std::to_string(row) + ": " + message : message), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dapm
