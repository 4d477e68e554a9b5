#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fmbsde {

/// Error with 1-based source position information.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t column)
      : std::runtime_error(msg + " (column " + std::to_string(column) + ")"), column(column) {}
  std::size_t column;
};

/// Arithmetic expression over declared variables. Grammar (loosest to
/// tightest): + -, * /, unary -, ^ (right-associative), atoms. Supported
/// functions: exp, log, sin, cos, abs, sqrt, tanh and two-argument max, min.
class Expression {
 public:
  /// Parses `src`; identifiers outside `variables` and the function names are
  /// rejected with a position and a closest-match suggestion.
  static Expression parse(const std::string& src, std::vector<std::string> variables);

  /// Evaluates with values bound positionally to the declared variables.
  double eval(std::span<const double> values) const;

  /// Canonical fully-parenthesized rendering; parse(print()) round-trips.
  std::string print() const;

  const std::vector<std::string>& variables() const { return vars_; }

  /// True if the expression mentions any of the given variable names.
  bool mentions(std::span<const std::string> names) const;

  struct Node;  // AST node; defined in the implementation file

 private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> vars_;
};

}  // namespace fmbsde
