#include "scabs/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "scabs/error.hpp"

namespace scabs::expr {

namespace {

const char* const kFunctions[] = {"sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh", "atan"};

bool known_function(const std::string& f) {
  for (const char* k : kFunctions) {
    if (f == k) return true;
  }
  return false;
}

Expr make(Op op, Expr a = nullptr, Expr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

Expr constant(double v) {
  auto n = std::make_shared<Node>();
  n->value = v;
  return n;
}

Expr variable(int i) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = i;
  return n;
}

Expr call(const std::string& f, Expr a) {
  auto n = std::make_shared<Node>();
  n->op = Op::Call;
  n->fn = f;
  n->a = std::move(a);
  return n;
}

bool is_const(const Expr& e, double v) { return e->op == Op::Const && e->value == v; }

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars,
         const std::map<std::string, double>& consts)
      : s_(text), vars_(vars), consts_(consts) {}

  Expr run() {
    Expr e = sum();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::ConfigError, "expression \"" + s_ + "\" at " + std::to_string(i_) + ": " + what);
  }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }

  bool eat(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  Expr sum() {
    Expr e = product();
    while (true) {
      if (eat('+')) e = make(Op::Add, e, product());
      else if (eat('-')) e = make(Op::Sub, e, product());
      else return e;
    }
  }

  Expr product() {
    Expr e = unary();
    while (true) {
      if (eat('*')) e = make(Op::Mul, e, unary());
      else if (eat('/')) e = make(Op::Div, e, unary());
      else return e;
    }
  }

  Expr unary() {
    if (eat('-')) return make(Op::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (eat('^')) return make(Op::Pow, base, unary());
    return base;
  }

  Expr atom() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      Expr e = sum();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    const char c = s_[i_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + i_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      i_ += static_cast<std::size_t>(end - begin);
      return constant(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = i_;
      while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) ++i_;
      const std::string name = s_.substr(start, i_ - start);
      if (eat('(')) {
        if (!known_function(name)) fail("unknown function '" + name + "'");
        Expr arg = sum();
        if (!eat(')')) fail("missing ')'");
        return call(name, arg);
      }
      for (std::size_t k = 0; k < vars_.size(); ++k) {
        if (vars_[k] == name) return variable(static_cast<int>(k));
      }
      if (auto it = consts_.find(name); it != consts_.end()) return constant(it->second);
      if (name == "pi") return constant(M_PI);
      if (name == "e") return constant(M_E);
      fail("unknown name '" + name + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  const std::vector<std::string>& vars_;
  const std::map<std::string, double>& consts_;
  std::size_t i_ = 0;
};

double apply(const std::string& f, double x) {
  if (f == "sin") return std::sin(x);
  if (f == "cos") return std::cos(x);
  if (f == "tan") return std::tan(x);
  if (f == "exp") return std::exp(x);
  if (f == "log") return std::log(x);
  if (f == "sqrt") return std::sqrt(x);
  if (f == "sinh") return std::sinh(x);
  if (f == "cosh") return std::cosh(x);
  if (f == "tanh") return std::tanh(x);
  return std::atan(x);
}

Expr add(Expr a, Expr b) { return simplify(make(Op::Add, std::move(a), std::move(b))); }
Expr sub(Expr a, Expr b) { return simplify(make(Op::Sub, std::move(a), std::move(b))); }
Expr mul(Expr a, Expr b) { return simplify(make(Op::Mul, std::move(a), std::move(b))); }
Expr div(Expr a, Expr b) { return simplify(make(Op::Div, std::move(a), std::move(b))); }
Expr neg(Expr a) { return simplify(make(Op::Neg, std::move(a))); }
Expr pow(Expr a, Expr b) { return simplify(make(Op::Pow, std::move(a), std::move(b))); }

// derivative of f at a, excluding the chain factor
Expr outer_derivative(const std::string& f, const Expr& a) {
  if (f == "sin") return call("cos", a);
  if (f == "cos") return neg(call("sin", a));
  if (f == "tan") return add(constant(1), pow(call("tan", a), constant(2)));
  if (f == "exp") return call("exp", a);
  if (f == "log") return div(constant(1), a);
  if (f == "sqrt") return div(constant(0.5), call("sqrt", a));
  if (f == "sinh") return call("cosh", a);
  if (f == "cosh") return call("sinh", a);
  if (f == "tanh") return sub(constant(1), pow(call("tanh", a), constant(2)));
  return div(constant(1), add(constant(1), pow(a, constant(2))));
}

}  // namespace

Expr parse(const std::string& text, const std::vector<std::string>& variables,
           const std::map<std::string, double>& constants) {
  return simplify(Parser(text, variables, constants).run());
}

double eval(const Expr& e, std::span<const double> vars) {
  switch (e->op) {
    case Op::Const: return e->value;
    case Op::Var: return vars[static_cast<std::size_t>(e->var)];
    case Op::Add: return eval(e->a, vars) + eval(e->b, vars);
    case Op::Sub: return eval(e->a, vars) - eval(e->b, vars);
    case Op::Mul: return eval(e->a, vars) * eval(e->b, vars);
    case Op::Div: return eval(e->a, vars) / eval(e->b, vars);
    case Op::Neg: return -eval(e->a, vars);
    case Op::Pow: return std::pow(eval(e->a, vars), eval(e->b, vars));
    case Op::Call: return apply(e->fn, eval(e->a, vars));
  }
  return 0.0;
}

Expr simplify(const Expr& e) {
  if (e->op == Op::Const || e->op == Op::Var) return e;
  Expr a = e->a ? simplify(e->a) : nullptr;
  Expr b = e->b ? simplify(e->b) : nullptr;
  const bool ca = a && a->op == Op::Const;
  const bool cb = b && b->op == Op::Const;
  switch (e->op) {
    case Op::Add:
      if (ca && cb) return constant(a->value + b->value);
      if (is_const(a, 0)) return b;
      if (is_const(b, 0)) return a;
      break;
    case Op::Sub:
      if (ca && cb) return constant(a->value - b->value);
      if (is_const(b, 0)) return a;
      if (is_const(a, 0)) return simplify(make(Op::Neg, b));
      break;
    case Op::Mul:
      if (ca && cb) return constant(a->value * b->value);
      if (is_const(a, 0) || is_const(b, 0)) return constant(0);
      if (is_const(a, 1)) return b;
      if (is_const(b, 1)) return a;
      break;
    case Op::Div:
      if (ca && cb) return constant(a->value / b->value);
      if (is_const(a, 0)) return constant(0);
      if (is_const(b, 1)) return a;
      break;
    case Op::Neg:
      if (ca) return constant(-a->value);
      if (a->op == Op::Neg) return a->a;
      break;
    case Op::Pow:
      if (ca && cb) return constant(std::pow(a->value, b->value));
      if (is_const(b, 0)) return constant(1);
      if (is_const(b, 1)) return a;
      break;
    case Op::Call:
      if (ca) return constant(apply(e->fn, a->value));
      return call(e->fn, a);
    default:
      break;
  }
  return make(e->op, a, b);
}

Expr derivative(const Expr& e, int var) {
  switch (e->op) {
    case Op::Const: return constant(0);
    case Op::Var: return constant(e->var == var ? 1 : 0);
    case Op::Add: return add(derivative(e->a, var), derivative(e->b, var));
    case Op::Sub: return sub(derivative(e->a, var), derivative(e->b, var));
    case Op::Mul:
      return add(mul(derivative(e->a, var), e->b), mul(e->a, derivative(e->b, var)));
    case Op::Div:
      return div(sub(mul(derivative(e->a, var), e->b), mul(e->a, derivative(e->b, var))),
                 pow(e->b, constant(2)));
    case Op::Neg: return neg(derivative(e->a, var));
    case Op::Pow: {
      const Expr da = derivative(e->a, var);
      const Expr db = derivative(e->b, var);
      if (is_const(db, 0)) {
        // b a^(b-1) a'
        return mul(mul(e->b, pow(e->a, sub(e->b, constant(1)))), da);
      }
      // a^b (b' log a + b a'/a)
      return mul(e, add(mul(db, call("log", e->a)), div(mul(e->b, da), e->a)));
    }
    case Op::Call: return mul(outer_derivative(e->fn, e->a), derivative(e->a, var));
  }
  return constant(0);
}

std::string to_string(const Expr& e, const std::vector<std::string>& variables) {
  std::ostringstream o;
  auto bin = [&](const char* op) {
    o << '(' << to_string(e->a, variables) << ' ' << op << ' ' << to_string(e->b, variables) << ')';
  };
  switch (e->op) {
    case Op::Const: o.precision(17); o << e->value; break;
    case Op::Var: o << variables.at(static_cast<std::size_t>(e->var)); break;
    case Op::Add: bin("+"); break;
    case Op::Sub: bin("-"); break;
    case Op::Mul: bin("*"); break;
    case Op::Div: bin("/"); break;
    case Op::Pow: bin("^"); break;
    case Op::Neg: o << "(-" << to_string(e->a, variables) << ')'; break;
    case Op::Call: o << e->fn << '(' << to_string(e->a, variables) << ')'; break;
  }
  return o.str();
}

}  // namespace scabs::expr
