#pragma once

#include <stdexcept>
#include <string>

namespace qameta {

/// Malformed or inconsistent input data (bad files, unknown ids, range violations).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid caller-supplied parameters or configuration.
class ParamError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A table for which the chi-squared statistic or Cramer's V is undefined.
class DegenerateTableError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace qameta
