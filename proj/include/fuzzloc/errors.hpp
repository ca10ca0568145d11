#pragma once

#include <stdexcept>
#include <string>

namespace fuzzloc {

// Syntax-level failure in the rule language, the query dialect, or a CSV/JSON
// input. line/column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line = 0, int column = 0)
      : std::runtime_error(format(message, line, column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  static std::string format(const std::string& message, int line, int column) {
    if (line == 0 && column == 0) return message;
    return message + " (line " + std::to_string(line) + ", column " +
           std::to_string(column) + ")";
  }
  int line_;
  int column_;
};

// Well-formed input that violates a semantic contract: unknown variable,
// unfuzzified column, empty aggregate, malformed construction parameters.
class SemanticError : public std::runtime_error {
 public:
  explicit SemanticError(const std::string& message)
      : std::runtime_error(message) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace fuzzloc
