#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace scabs::expr {

enum class Op { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Call };

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Const;
  double value = 0.0;  // Const
  int var = -1;        // Var
  std::string fn;      // Call
  Expr a, b;
};

/// Parses +, -, *, /, ^ (right associative), unary minus, parentheses,
/// numbers, the constants pi and e, names from `variables` and `constants`,
/// and sin cos tan exp log sqrt sinh cosh tanh atan. Throws ConfigError
/// with the offending position.
Expr parse(const std::string& text, const std::vector<std::string>& variables,
           const std::map<std::string, double>& constants = {});

double eval(const Expr& e, std::span<const double> vars);

/// d e / d vars[var], simplified.
Expr derivative(const Expr& e, int var);

/// Folds constants and drops neutral elements.
Expr simplify(const Expr& e);

std::string to_string(const Expr& e, const std::vector<std::string>& variables);

}  // namespace scabs::expr
