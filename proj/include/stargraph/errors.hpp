#pragma once

#include <stdexcept>
#include <string>

namespace stargraph {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
  using Error::Error;
};

class UnsupportedOrder : public Error {
public:
  using Error::Error;
};

class HypothesisViolation : public Error {
public:
  using Error::Error;
};

// Integrator or root finder gave up; message carries the diagnostics.
class NumericFailure : public Error {
public:
  using Error::Error;
};

class TruncationError : public Error {
public:
  using Error::Error;
};

class GridTooCoarse : public Error {
public:
  using Error::Error;
};

class IncompleteSpectrum : public Error {
public:
  using Error::Error;
};

class ContourThroughZero : public Error {
public:
  using Error::Error;
};

class AmbiguousResonance : public Error {
public:
  AmbiguousResonance(const std::string& what, int low, int high)
      : Error(what), low_candidate(low), high_candidate(high) {}
  int low_candidate;
  int high_candidate;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace stargraph
