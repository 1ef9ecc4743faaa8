#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hybrid/types.hpp"

/// Scalar expression language used by scenario files.
///
/// Grammar, loosest binding first:
///   expr    := or
///   or      := and ("or" and)*
///   and     := not ("and" not)*
///   not     := "not" not | cmp
///   cmp     := sum (("<" | "<=" | "=" | ">=" | ">") sum)?
///   sum     := product (("+" | "-") product)*
///   product := unary (("*" | "/") unary)*
///   unary   := "-" unary | power
///   power   := atom ("^" unary)?
///   atom    := number | name | name "(" expr ("," expr)* ")" | "(" expr ")"
/// `&&`, `||`, `!`, `==`, `<=`/`>=` spelled with the unicode signs are accepted on input.
/// Names are coordinates x0, x1, ... (and y0, ... in relations), declared
/// parameters, and the constants inf and pi. Functions: pow sqrt log exp abs
/// sign min max piecewise.
namespace hybrid::expr {

struct Position {
  std::size_t line = 1;
  std::size_t column = 1;
};

struct Diagnostic {
  Position pos;
  std::string message;
  std::string to_string() const;
};

/// Input error carrying positioned diagnostics.
class DiagnosticError : public Error {
 public:
  explicit DiagnosticError(std::vector<Diagnostic> diags);
  explicit DiagnosticError(Diagnostic d) : DiagnosticError(std::vector<Diagnostic>{std::move(d)}) {}
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

enum class Type { real, boolean };

enum class Op {
  number,
  constant,
  parameter,
  variable,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  call,
  lt,
  le,
  eq,
  ge,
  gt,
  logical_and,
  logical_or,
  logical_not,
  piecewise
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::number;
  Type type = Type::real;
  /// Literal, or the bound value of a constant or parameter.
  double value = 0.0;
  /// Variable family ('x' or 'y') and index.
  char family = 'x';
  std::size_t index = 0;
  /// Function, constant or parameter name.
  std::string name;
  std::vector<NodePtr> args;
  Position pos;
};

/// What names an expression may use.
struct Context {
  std::size_t x_dim = 0;
  /// Dimension of the y family; relations use x for before and y for after.
  std::size_t y_dim = 0;
  bool allow_y = false;
  const std::map<std::string, double>* params = nullptr;
};

class Expression {
 public:
  Expression() = default;

  /// Parses and type-checks `text`; positions are offset by `origin`.
  static Expression parse(std::string_view text, const Context& ctx, Position origin = {});
  /// Parses "(e1, ..., en)" with real entries.
  static std::vector<Expression> parse_tuple(std::string_view text, const Context& ctx,
                                             Position origin = {});

  Type type() const { return root_->type; }
  bool empty() const { return !root_; }

  double eval(const Vector& x, const Vector& y = Vector()) const;
  bool test(const Vector& x, const Vector& y = Vector()) const;
  /// Relaxed test: with tol > 0 every comparison passes with margin >= -tol,
  /// including comparisons under `not`. tol == 0 is the exact test.
  bool test(const Vector& x, const Vector& y, double tol) const;
  /// Value and gradient with respect to x by forward differentiation.
  double eval_gradient(const Vector& x, Vector& grad) const;

  /// Canonical text with minimal parentheses.
  std::string to_string() const;
  const Node& root() const { return *root_; }

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  explicit Expression(NodePtr root) : root_(std::move(root)) {}
  NodePtr root_;
};

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

}  // namespace hybrid::expr
