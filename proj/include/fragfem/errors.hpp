#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fragfem {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfDomain : public Error {
 public:
  using Error::Error;
};

class UnsupportedDegree : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public Error {
 public:
  explicit UnknownIdentifier(const std::string& name)
      : Error("unknown identifier '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class UnknownCase : public Error {
 public:
  using Error::Error;
};

class NonFiniteEntry : public Error {
 public:
  using Error::Error;
};

// Numerical failures: the CLI maps these to exit code 3.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class SingularSystem : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class SingularMass : public NumericalFailure {
 public:
  using NumericalFailure::NumericalFailure;
};

class NonFiniteState : public NumericalFailure {
 public:
  explicit NonFiniteState(long step)
      : NumericalFailure("non-finite state at step " + std::to_string(step)), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

class NoConvergence : public NumericalFailure {
 public:
  NoConvergence(const std::string& what, double estimate, double gap)
      : NumericalFailure(what), estimate_(estimate), gap_(gap) {}
  double estimate() const { return estimate_; }
  double gap() const { return gap_; }

 private:
  double estimate_;
  double gap_;
};

class DegenerateSequence : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error((line > 0 ? "line " + std::to_string(line) : std::string("override")) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public Error {
 public:
  ValidationError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace fragfem
