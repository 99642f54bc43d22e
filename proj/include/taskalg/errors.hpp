#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace taskalg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidEnvironment : public Error {
 public:
  using Error::Error;
};

/// Formula text could not be parsed; `offset` is the byte position of the
/// offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class EnvironmentDisconnected : public Error {
 public:
  using Error::Error;
};

class IncompatibleTables : public Error {
 public:
  using Error::Error;
};

class MissingTask : public Error {
 public:
  explicit MissingTask(const std::string& key)
      : Error("missing task '" + key + "' in library"), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class NegationUnavailable : public Error {
 public:
  using Error::Error;
};

class SubsetExplosion : public Error {
 public:
  using Error::Error;
};

/// Brute-force enumeration exceeded its node budget.
class ExplosionGuard : public Error {
 public:
  using Error::Error;
};

class OracleTimeout : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace taskalg
