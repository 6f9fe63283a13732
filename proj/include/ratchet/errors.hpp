#pragma once

#include <stdexcept>
#include <string>

namespace ratchet {

/// Base class for every failure raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Event count exceeded the configured safety cap before the horizon.
/// Signals a run heading towards explosion; the process itself is a.s. finite.
class HorizonOverflow : public Error {
 public:
  using Error::Error;
};

/// The pathwise domination coupling requires a non-decreasing death polynomial.
class NonMonotoneDeath : public Error {
 public:
  using Error::Error;
};

/// Internal assertion of the domination pair; must never fire.
class DominationBroken : public Error {
 public:
  using Error::Error;
};

/// Internal assertion of the five-class coupling; must never fire.
class InvariantBroken : public Error {
 public:
  using Error::Error;
};

/// A high-density guard condition failed.
class GuardViolation : public Error {
 public:
  using Error::Error;
};

/// Replay of a trajectory disagreed with a recorded snapshot.
class SnapshotMismatch : public Error {
 public:
  using Error::Error;
};

/// Dense-kernel computation refused: the active box is too large.
class SizeLimit : public Error {
 public:
  using Error::Error;
};

/// An analytic bound was queried outside its domain of validity.
class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

/// No admissible density threshold exists for the given polynomials.
class NoSuchU : public Error {
 public:
  using Error::Error;
};

/// Structured-text parse failure with source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_ = 0;
  int column_ = 0;
};

/// Model parameters violate one of the standing assumptions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ratchet
