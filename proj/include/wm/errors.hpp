#pragma once

#include <stdexcept>
#include <string>

namespace wm {

// Invalid argument or precondition (non-positive scale, empty range, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Iterative or adaptive numerics that did not reach their tolerance.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what, double partial = 0.0, double estimate = 0.0)
        : std::runtime_error(what), partial_value(partial), error_estimate(estimate) {}
    double partial_value;
    double error_estimate;
};

struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    ConfigError(const std::string& what, int line_no = 0)
        : std::runtime_error(what), line(line_no) {}
    int line;
};

}  // namespace wm
