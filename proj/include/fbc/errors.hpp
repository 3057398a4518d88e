#pragma once

#include <stdexcept>
#include <string>

namespace fbc {

/// Sizes of two operands do not agree (mesh levels, vector lengths).
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The mapped physical domain has collapsed: 1 + gamma is not positive.
class DegenerateGeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A factorization hit a zero or vanishing pivot.
class SingularMatrixError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace fbc
