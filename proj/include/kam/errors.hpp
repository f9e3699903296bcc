#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace kam {

/// Base of every error thrown by the library. Callers that only need a
/// message can catch this; the subclasses exist so tests and the CLI can
/// tell failure modes apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class RealityError : public Error {
 public:
  using Error::Error;
};

/// An exact resonance k . alpha = 0 was met; `witness()` is the offending k.
class ResonanceError : public Error {
 public:
  ResonanceError(const std::string& what, std::vector<long long> witness)
      : Error(what), witness_(std::move(witness)) {}
  const std::vector<long long>& witness() const noexcept { return witness_; }

 private:
  std::vector<long long> witness_;
};

class InternalError : public Error {
 public:
  using Error::Error;
};

class ConstantsInconsistencyError : public Error {
 public:
  using Error::Error;
};

class StepSizeError : public Error {
 public:
  using Error::Error;
};

class StepConditionError : public Error {
 public:
  using Error::Error;
};

class ContractionError : public Error {
 public:
  ContractionError(const std::string& what, double ratio) : Error(what), ratio_(ratio) {}
  double ratio() const noexcept { return ratio_; }

 private:
  double ratio_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ThresholdError : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public Error {
 public:
  using Error::Error;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

}  // namespace kam
