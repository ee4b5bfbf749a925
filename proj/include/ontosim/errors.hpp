#pragma once

#include <stdexcept>
#include <string>

namespace ontosim {

// Base for every error the library raises. Engine code throws; the CLI maps
// the categories onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

class MemoryCap : public Error {
 public:
  using Error::Error;
};

class ZeroNorm : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class ZeroOverlap : public Error {
 public:
  using Error::Error;
};

class BadEdges : public Error {
 public:
  using Error::Error;
};

class InsufficientExpected : public Error {
 public:
  using Error::Error;
};

class DegenerateRegion : public Error {
 public:
  using Error::Error;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

// Malformed binary dump or CSV. `offset` is the byte (or line) position at
// which decoding stopped.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, long long offset)
      : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  long long offset() const { return offset_; }

 private:
  long long offset_;
};

// Scenario configuration rejected during validation. `field` names the
// offending key as "section.key".
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace ontosim
