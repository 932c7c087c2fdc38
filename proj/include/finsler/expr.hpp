#pragma once

// Expression language used to define metrics:
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := atom ('^' number)?
//   atom   := number | ident | func '(' expr ')' | '(' expr ')' | '-' atom
//
// Identifiers match [a-z][a-z0-9_]*, functions are sqrt, exp, log, sin, cos.

#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/jet.hpp"

namespace finsler {

enum class NodeKind { constant, variable, add, sub, mul, div, power, negate, call };

struct ExprNode {
  NodeKind kind;
  double number = 0.0;        // constant value, or exponent for power
  std::string name;           // variable name or function name
  std::size_t position = 0;   // source offset, for diagnostics
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

/// Immutable parsed expression.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::shared_ptr<const ExprNode> root, std::string source = {});

  const ExprNode& root() const { return *root_; }
  const std::string& source() const { return source_; }
  bool empty() const { return !root_; }

  /// Names of all variables referenced.
  std::set<std::string> free_variables() const;
  /// Throws InputError if a referenced variable is not in `declared`.
  void validate(const std::set<std::string>& declared) const;

  /// Canonical text; parse(print()) reproduces the same tree.
  std::string print() const;

  bool operator==(const Expression& other) const;

 private:
  std::shared_ptr<const ExprNode> root_;
  std::string source_;
};

Expression parse(std::string_view source);
inline Expression constant_expression(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::constant;
  n->number = v;
  return Expression(n);
}

/// Expression with variables resolved to slots, ready for repeated
/// evaluation on reals or jets.
class CompiledExpression {
 public:
  CompiledExpression() = default;
  /// Throws InputError for any free variable not in `slots`.
  CompiledExpression(const Expression& expr, const std::vector<std::string>& slots);

  double eval(std::span<const double> values) const;
  /// Domain errors are rethrown with the offending node's source position.
  Jet eval(std::span<const Jet> values) const;

  const Expression& expression() const { return expr_; }
  std::size_t slot_count() const { return slot_count_; }

 private:
  struct Op {
    NodeKind kind;
    double number;
    int slot;      // variable slot
    int fn;        // function id for call
    std::size_t position;
  };
  Expression expr_;
  std::vector<Op> program_;  // postfix
  std::size_t slot_count_ = 0;
};

/// Evaluate over an explicit name -> jet binding. All jets must share the
/// same number of variables. Unbound variables raise InputError.
Jet eval_on_jets(const Expression& ast, const std::vector<std::pair<std::string, Jet>>& env);

}  // namespace finsler
