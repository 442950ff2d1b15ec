#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace bnsens {

/// Base class for every recoverable failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed network, evidence or config document. The message carries the
/// location (byte offset or JSON path) of the offending element.
class FormatError : public Error {
 public:
  using Error::Error;
};

class InvalidNetworkError : public Error {
 public:
  InvalidNetworkError(const std::string& what, std::vector<std::string> violations)
      : Error(what), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// A log-odds transform was requested at p = 0 or p = 1.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

/// An evidence weight is unbounded (zero leak with a nonzero link, or link = 1).
class InfiniteWeightError : public Error {
 public:
  using Error::Error;
};

class InvalidEvidenceError : public Error {
 public:
  using Error::Error;
};

/// Too many unobserved relevant nodes for exact enumeration; use likelihood
/// weighting instead.
class EnumerationCapError : public Error {
 public:
  using Error::Error;
};

class ImpossibleEvidenceError : public Error {
 public:
  using Error::Error;
};

/// Every likelihood weight came out zero.
class DegenerateEvidenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bnsens
