#pragma once

#include <stdexcept>
#include <string>

namespace aeidc {

// Shape/dimension mismatches between tensors or between tensors and layer specs.
struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid argument values (asymmetric Gram input, batch too small, bad config field).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed external files (IDX, checkpoints, tensor files).
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values encountered during optimization.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace aeidc
