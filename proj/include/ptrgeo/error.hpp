#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptrgeo {

// Base of every error thrown by the library. Callers that only care about
// "something in ptrgeo failed" catch this; the subclasses let tests and the
// CLI distinguish the failure category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not agree for an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller violated an API precondition (e.g. backward from a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during training; carries the offending parameter.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::string param = {})
      : Error(what), param_(std::move(param)) {}
  const std::string& parameter() const noexcept { return param_; }

 private:
  std::string param_;
};

// Geometric input cannot be solved (collinear, duplicates, too few points).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Solver asked to work beyond its supported size (Held-Karp above n=20).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Generation request that can never be satisfied.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Malformed text or binary input. Line number is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Structurally parsed data whose content is invalid (index out of range, not a permutation).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Fixed-dictionary models cannot score an input of a different length.
class UnsupportedLengthError : public Error {
 public:
  UnsupportedLengthError(std::size_t trained_n, std::size_t got_n)
      : Error("model was trained for n=" + std::to_string(trained_n) +
              " and cannot be applied to n=" + std::to_string(got_n)),
        trained_n_(trained_n),
        got_n_(got_n) {}
  std::size_t trained_n() const noexcept { return trained_n_; }
  std::size_t got_n() const noexcept { return got_n_; }

 private:
  std::size_t trained_n_;
  std::size_t got_n_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace ptrgeo
