#pragma once

#include <stdexcept>
#include <string>

namespace amalgam {

/// Invalid arguments: bad grid sizes, exponents outside their range,
/// malformed specs, mismatched grids.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A ball (or sub-ball) that contains no grid sample.
class DegenerateBallError : public std::runtime_error {
public:
    explicit DegenerateBallError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or other numerical breakdown.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace amalgam
