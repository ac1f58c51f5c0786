#pragma once

#include <stdexcept>
#include <string>

namespace ogf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input document (JSON, CSV, model file).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A structurally valid document that violates a domain invariant.
/// `element()` names the offending node/pipeline/compressor/source id.
class ValidationError : public Error {
 public:
  ValidationError(std::string element, const std::string& what)
      : Error(element.empty() ? what : what + " [" + element + "]"), element_(std::move(element)) {}

  const std::string& element() const noexcept { return element_; }

 private:
  std::string element_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace ogf
