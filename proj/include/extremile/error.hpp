#pragma once

#include <stdexcept>
#include <string>

namespace extremile {

// Error categories map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* code() const noexcept = 0;
  virtual int exit_code() const noexcept = 0;
};

// Argument outside a function's mathematical domain (e.g. u outside [0,1]).
class DomainError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_DOMAIN"; }
  int exit_code() const noexcept override { return 4; }
};

// Malformed, non-finite, rank-deficient or dimensionally inconsistent data.
class DataError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_DATA"; }
  int exit_code() const noexcept override { return 2; }
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_CONVERGENCE"; }
  int exit_code() const noexcept override { return 3; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* code() const noexcept override { return "E_CONFIG"; }
  int exit_code() const noexcept override { return 4; }
};

}  // namespace extremile
