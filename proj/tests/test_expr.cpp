#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "scabs/error.hpp"
#include "scabs/expr.hpp"

using namespace scabs;
namespace ex = scabs::expr;

namespace {

const std::vector<std::string> kVars = {"x1", "x2", "u1"};

double at(const std::string& text, std::vector<double> v, std::map<std::string, double> c = {}) {
  return ex::eval(ex::parse(text, kVars, c), v);
}

}  // namespace

TEST(Expr, Precedence) {
  EXPECT_DOUBLE_EQ(at("1 + 2*3", {0, 0, 0}), 7);
  EXPECT_DOUBLE_EQ(at("(1 + 2)*3", {0, 0, 0}), 9);
  EXPECT_DOUBLE_EQ(at("2^3^2", {0, 0, 0}), 512);
  EXPECT_DOUBLE_EQ(at("-x1^2", {3, 0, 0}), -9);
  EXPECT_DOUBLE_EQ(at("x1 - x2 - u1", {5, 2, 1}), 2);
  EXPECT_DOUBLE_EQ(at("8 / 4 / 2", {0, 0, 0}), 1);
  EXPECT_DOUBLE_EQ(at("1.5e2 + .5", {0, 0, 0}), 150.5);
}

TEST(Expr, FunctionsAndConstants) {
  EXPECT_NEAR(at("sin(pi/2) + cos(0) + exp(1) - e", {0, 0, 0}), 2, 1e-15);
  EXPECT_NEAR(at("sqrt(x1) * log(x2)", {4, std::exp(2.0), 0}), 4, 1e-14);
  EXPECT_NEAR(at("w^2 * tanh(u1)", {0, 0, 0.3}, {{"w", 2}}), 4 * std::tanh(0.3), 1e-15);
}

TEST(Expr, RejectsMalformedInput) {
  for (const char* bad : {"", "1 +", "x3", "sin(x1", "foo(x1)", "x1 x2", "2 ** 3", "(x1))"}) {
    try {
      ex::parse(bad, kVars);
      ADD_FAILURE() << "accepted \"" << bad << "\"";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::ConfigError) << bad;
    }
  }
}

TEST(Expr, DerivativesMatchFiniteDifferences) {
  const std::vector<std::string> exprs = {
      "-w^2*sin(x1) - u1*w^2*cos(x1) - 2*g*x2", "x1^3 / (1 + x2^2)", "exp(-x1*x2) * atan(x1) + sqrt(1 + x2^2)",
      "tan(x1/3) * sinh(x2) - cosh(u1*x1)", "log(2 + sin(x1*x2)) ^ 2"};
  const std::map<std::string, double> c = {{"w", 1.3}, {"g", 0.05}};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (const auto& text : exprs) {
    const auto f = ex::parse(text, kVars, c);
    for (int var = 0; var < 2; ++var) {
      const auto df = ex::derivative(f, var);
      const auto d2f = ex::derivative(df, var);
      for (int k = 0; k < 20; ++k) {
        std::vector<double> p = {d(rng), d(rng), d(rng)};
        const double h = 1e-5;
        auto shifted = [&](double s) {
          auto q = p;
          q[var] += s;
          return q;
        };
        const double fd = (ex::eval(f, shifted(h)) - ex::eval(f, shifted(-h))) / (2 * h);
        EXPECT_NEAR(ex::eval(df, p), fd, 1e-6 * std::max(1.0, std::abs(fd))) << text;
        const double fd2 = (ex::eval(df, shifted(h)) - ex::eval(df, shifted(-h))) / (2 * h);
        EXPECT_NEAR(ex::eval(d2f, p), fd2, 1e-6 * std::max(1.0, std::abs(fd2))) << text;
      }
    }
  }
}

TEST(Expr, SimplifyFoldsConstants) {
  const auto e = ex::simplify(ex::parse("0*x1 + 1*x2 + (2+3)", kVars));
  EXPECT_EQ(ex::to_string(e, kVars), ex::to_string(ex::simplify(ex::parse("x2 + 5", kVars)), kVars));
  EXPECT_EQ(ex::derivative(ex::parse("7*x2", kVars), 0)->op, ex::Op::Const);
}
