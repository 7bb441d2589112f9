#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace khess {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation not defined for the given operator, dimension or chart.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Eigenvalues left the admissible cone.
///
/// `failing_index` is the first i with sigma_i <= 0 (1-based, as in sigma_i),
/// `failing_value` the offending sigma_i. When raised from a grid routine,
/// `node` is the flat node index and `eigenvalues` the spectrum found there;
/// otherwise `node` is -1.
class ConeViolation : public Error {
public:
    ConeViolation(const std::string& what, int failing_index, double failing_value,
                  long node = -1, std::vector<double> eigenvalues = {})
        : Error(what),
          failing_index(failing_index),
          failing_value(failing_value),
          node(node),
          eigenvalues(std::move(eigenvalues)) {}

    int failing_index;
    double failing_value;
    long node;
    std::vector<double> eigenvalues;
};

/// Malformed expression or configuration text. `location` is a human readable
/// position ("line 3", "column 7").
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string location)
        : Error(what + " (at " + location + ")"), location(std::move(location)) {}

    std::string location;
};

/// A stated hypothesis of an estimate does not hold on the given state.
class HypothesisError : public Error {
public:
    using Error::Error;
};

}  // namespace khess
