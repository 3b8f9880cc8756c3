#pragma once

#include <stdexcept>
#include <string>

namespace dsrc {

/// Bad input: malformed config, violated precondition, unknown registry name.
/// Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical failure at runtime: blow-up, non-convergence, rank deficiency.
/// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Pre-estimated cost exceeds the declared budget. Maps to CLI exit code 4.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& msg, double estimated_cost)
        : std::runtime_error(msg), estimated_cost(estimated_cost) {}

    double estimated_cost;
};

} // namespace dsrc
