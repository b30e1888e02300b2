#ifndef HOED_ERRORS_HPP
#define HOED_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hoed {

/// Operand sizes or spaces do not match.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Factorization, eigensolver or positivity failure.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user-supplied parameter (non-positive scale, weight outside [0,1], ...).
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A vector has components outside the retained prior eigenspace, so its
/// Cameron-Martin norm cannot be evaluated without extrapolating.
class CameronMartinError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace hoed

#endif
