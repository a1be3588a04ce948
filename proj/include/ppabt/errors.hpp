// Exception types shared by every ppabt module.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ppabt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the LTLf, proposition and mission parsers. `line`/`column` are
// 1-based; `offset` is the byte offset into the input.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::size_t line, std::size_t column, std::string expected,
              std::string found)
      : Error("syntax error at " + std::to_string(line) + ":" + std::to_string(column) +
              ": expected " + expected + ", found " + found),
        offset_(offset),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::size_t line_;
  std::size_t column_;
  std::string expected_;
};

class UnknownAtom : public Error {
 public:
  explicit UnknownAtom(std::string name)
      : Error("unknown atom '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class IndexOutOfRange : public Error {
 public:
  IndexOutOfRange(std::size_t index, std::size_t size)
      : Error("trace index " + std::to_string(index) + " out of range for length " +
              std::to_string(size)) {}
};

class InvalidTrace : public Error {
 public:
  using Error::Error;
};

class TemporalOperatorInCondition : public Error {
 public:
  explicit TemporalOperatorInCondition(const std::string& field)
      : Error("temporal operator in task condition '" + field + "'") {}
};

class ReservedAtom : public Error {
 public:
  explicit ReservedAtom(const std::string& name)
      : Error("atom '" + name + "' is reserved for action propositions") {}
};

class DuplicateTaskName : public Error {
 public:
  explicit DuplicateTaskName(const std::string& name)
      : Error("duplicate task name '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnboundAction : public Error {
 public:
  explicit UnboundAction(const std::string& binding)
      : Error("no action runner bound for '" + binding + "'"), binding_(binding) {}
  const std::string& binding() const noexcept { return binding_; }

 private:
  std::string binding_;
};

class ConcurrentActionConflict : public Error {
 public:
  ConcurrentActionConflict(const std::string& first, const std::string& second)
      : Error("actions '" + first + "' and '" + second + "' both fired in one tick") {}
};

class NonStochasticKernel : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(std::size_t iterations)
      : Error("policy iteration did not converge after " + std::to_string(iterations) +
              " iterations") {}
};

class BoundTooLarge : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ppabt
