#pragma once

#include <stdexcept>
#include <string>

namespace gamow {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (k = 0, r < 0, b <= a, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An S-matrix or Green function was requested exactly at a zero of the Jost function.
class PoleError : public Error {
 public:
  using Error::Error;
};

/// A zero of the Jost function lies on (or within 1e-6 of) a search contour.
class BoundaryZeroError : public Error {
 public:
  using Error::Error;
};

class NonIntegerWindingError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Contour residue failed its node-doubling consistency check, or vanished.
class ResidueError : public Error {
 public:
  using Error::Error;
};

class ExtrapolationError : public Error {
 public:
  using Error::Error;
};

/// A wave packet cannot dominate the exponential growth it is paired against.
class FalloffError : public Error {
 public:
  using Error::Error;
};

/// Complex wave number outside the region a packet's falloff certificate covers.
class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Time evolution requested outside the half-line on which the semigroup is defined.
class SemigroupDomainError : public Error {
 public:
  using Error::Error;
};

class RegulatorSignError : public Error {
 public:
  using Error::Error;
};

class BackgroundDivergenceError : public Error {
 public:
  using Error::Error;
};

class WindowNotFoundError : public Error {
 public:
  using Error::Error;
};

class NoPolesError : public Error {
 public:
  using Error::Error;
};

}  // namespace gamow
