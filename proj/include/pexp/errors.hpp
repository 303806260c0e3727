#pragma once

#include <stdexcept>
#include <string>

namespace pexp {

// Malformed or inconsistent inputs: bad CSV rows, shape mismatches, parameters
// outside their admissible range, unknown config keys. CLI exit code 2.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerically degenerate problems: zero instrument variance, collinear
// regressor blocks, single-cluster variance requests. CLI exit code 3.
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pexp
