#pragma once

#include <stdexcept>
#include <string>

namespace hamid {

// Base for every error the library raises on a broken contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// The accessible set is not invariant under the model's adjoint action.
class ClosureError : public Error {
 public:
  using Error::Error;
};

class NormalizationError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

// Every Hankel singular value fell below the truncation threshold.
class EmptySystemError : public Error {
 public:
  using Error::Error;
};

// The discrete generator has eigenvalues on (or near) the negative real axis,
// or the sampling period violates a supplied spectral bound.
class AliasingError : public Error {
 public:
  using Error::Error;
};

// Realization order and model accessible dimension disagree.
class StructuralMismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace hamid
