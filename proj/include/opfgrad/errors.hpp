#pragma once

#include <stdexcept>
#include <string>

namespace opfgrad {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (bad dimensions, non-positive susceptance, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Case-file schema violation; the message carries the JSON field path.
class SchemaError : public InvalidInput {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : InvalidInput(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class MultipleOptima : public Error {
 public:
  using Error::Error;
};

class DependentSets : public Error {
 public:
  using Error::Error;
};

class ConstructionFailed : public Error {
 public:
  using Error::Error;
};

class SingularCombo : public Error {
 public:
  using Error::Error;
};

class RegionBoundary : public Error {
 public:
  using Error::Error;
};

class SingularM : public Error {
 public:
  SingularM(const std::string& what, double condition)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class NotOptimal : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace opfgrad
