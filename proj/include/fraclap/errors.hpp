#pragma once

#include <stdexcept>
#include <string>

namespace fraclap {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Arguments outside the documented domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

// Evaluation at (or too close to) a kernel singularity.
class SingularityError : public Error {
public:
  using Error::Error;
};

// Mismatched sizes or meshes between operands.
class MismatchError : public Error {
public:
  using Error::Error;
};

// Resolution too low for the requested operation.
class ResolutionError : public Error {
public:
  using Error::Error;
};

// Linear solver failure (singular system or non-convergence).
class SolverError : public Error {
public:
  using Error::Error;
};

}  // namespace fraclap
