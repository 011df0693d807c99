#pragma once

#include <stdexcept>
#include <string>

namespace fairaudit {

/// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input data that cannot be audited (missing columns, bad numerics, too few groups).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid audit configuration (alpha, adjustment name, permutation count).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace fairaudit
