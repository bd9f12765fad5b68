// SPDX-License-Identifier: Apache-2.0

#ifndef DECOPT_ERROR_HPP
#define DECOPT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace decopt
{

// Bad user input: parameters, config keys, topology files. Maps to exit code 1.
class ConfigError : public std::invalid_argument
{
public:
  explicit ConfigError(const std::string &what) : std::invalid_argument(what) {}
};

// Failure while a run is executing (non-finite iterate, I/O). Maps to exit code 2.
class RuntimeFailure : public std::runtime_error
{
public:
  explicit RuntimeFailure(const std::string &what) : std::runtime_error(what) {}
};

// Mixing-matrix validation failure; carries which invariant broke and where.
class ValidationError : public ConfigError
{
public:
  enum class Violation
  {
    NotSquare,
    NonFinite,
    Asymmetric,
    NegativeEntry,
    RowSum,
    EigenvalueRange,
    Disconnected,
  };

  ValidationError(Violation v, std::size_t row, std::size_t col, const std::string &what)
    : ConfigError(what), violation_(v), row_(row), col_(col)
  {
  }

  Violation violation() const { return violation_; }
  std::size_t row() const { return row_; }
  std::size_t col() const { return col_; }

private:
  Violation violation_;
  std::size_t row_, col_;
};

// LIBSVM text parse failure. Line and column are 1-based.
class ParseError : public ConfigError
{
public:
  ParseError(std::size_t line, std::size_t column, const std::string &msg)
    : ConfigError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                  ": " + msg),
      line_(line), column_(column)
  {
  }

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_, column_;
};

}  // namespace decopt

#endif  // DECOPT_ERROR_HPP
