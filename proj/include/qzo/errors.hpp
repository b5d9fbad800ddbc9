#pragma once

#include <stdexcept>
#include <string>

namespace qzo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};
class ShapeError : public Error {
 public:
  using Error::Error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
// Point outside the open set where a mirror potential is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};
class ResourceError : public Error {
 public:
  using Error::Error;
};
class InvalidState : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
// Instance data parsed fine but violates its normalization invariants.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace qzo
