#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace vandamp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Malformed or out-of-range input (bad dimensions, invalid parameters, empty grids).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An iterative numerical method failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An integral the caller needs is infinite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_dimension(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw InputError(std::string(what) + ": dimension mismatch (expected " + std::to_string(n) +
                     ", got " + std::to_string(v.size()) + ")");
  }
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace vandamp
