#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "scabs/dynamics.hpp"
#include "scabs/error.hpp"

using namespace scabs;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST(Dynamics, HarmonicOscillatorFlow) {
  SampledSystem s;
  s.n = 2;
  s.inputs = {Vec::Zero(1)};
  s.input_names = {"0"};
  s.T = 1.0;
  s.rhs = [](const Vec& x, const Vec&) { return v2(x[1], -x[0]); };
  s.rhs_jac = [](const Vec&, const Vec&) {
    Mat J(2, 2);
    J << 0, 1, -1, 0;
    return J;
  };
  Vec x = flow(s, v2(1, 0), 0, 2.0);
  EXPECT_NEAR(x[0], std::cos(2.0), 1e-8);
  EXPECT_NEAR(x[1], -std::sin(2.0), 1e-8);
}

TEST(Dynamics, DiscreteComplementaryExtension) {
  DiscreteSystem d;
  d.n = 2;
  d.input_names = {"a"};
  Mat A(2, 2);
  A << 2, 1, 0, 1;
  d.step = [A](const Vec& x, int) { return Vec(A * x); };
  d.jacobian = [A](const Vec&, int) { return A; };
  HalfSpacePair hp{v2(1, 1), v2(0, 1)};
  auto out = comp_ext_discrete(d, 0, hp);
  EXPECT_TRUE(out.p.isApprox(v2(3, 1)));
  EXPECT_TRUE((A.transpose() * out.v).isApprox(hp.v));
}

TEST(Dynamics, SingularJacobianIsReported) {
  DiscreteSystem d;
  d.n = 2;
  d.input_names = {"a"};
  d.step = [](const Vec& x, int) { return v2(x[0], 0); };
  d.jacobian = [](const Vec&, int) {
    Mat J = Mat::Zero(2, 2);
    J(0, 0) = 1;
    return J;
  };
  try {
    comp_ext_discrete(d, 0, {v2(0, 0), v2(1, 0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SingularJacobian);
  }
}

TEST(Dynamics, PendulumAdjointPreservesPairing) {
  auto p = make_pendulum(1.0, 0.01, 0.2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-2, 2);
  for (int k = 0; k < 20; ++k) {
    Vec x = v2(d(rng), d(rng));
    Vec v = v2(d(rng), d(rng));
    Vec h = v2(d(rng), d(rng));
    int u = k % 3;
    auto out = comp_ext_sampled(p, u, {x, v});
    Mat J = flow_jacobian(p, x, u, p.T);
    EXPECT_NEAR(out.v.dot(J * h), v.dot(h), 1e-7);
    EXPECT_LT((out.p - flow(p, x, u, p.T)).norm(), 1e-7);
  }
}

TEST(Dynamics, FixedStepAgreesWithAdaptive) {
  auto p = make_pendulum(1.0, 0.01, 0.2);
  auto q = p;
  q.integrator.fixed_step = true;
  q.integrator.fixed_steps = 200;
  for (int u = 0; u < 3; ++u) {
    Vec a = flow(p, v2(0.3, -0.7), u, p.T);
    Vec b = flow(q, v2(0.3, -0.7), u, q.T);
    EXPECT_LT((a - b).norm(), 1e-6);
  }
}

TEST(Dynamics, SecondVariationMatchesFiniteDifference) {
  auto p = make_pendulum(1.0, 0.01, 0.2);
  Vec x = v2(0.4, 0.1);
  Vec h = v2(0.3, -0.2);
  const double e = 1e-3;
  Vec fd = (flow(p, x + e * h, 2, 0.6) - 2 * flow(p, x, 2, 0.6) + flow(p, x - e * h, 2, 0.6)) /
           (e * e);
  Vec z = second_variation_transport(p, x, 2, h, 0.6);
  EXPECT_LT((fd - z).norm(), 1e-4);
}

TEST(Dynamics, EscapeIsReported) {
  SampledSystem s;
  s.n = 1;
  s.inputs = {Vec::Zero(1)};
  s.input_names = {"0"};
  s.T = 2.0;
  s.rhs = [](const Vec& x, const Vec&) { return Vec(x.array().square()); };
  s.rhs_jac = [](const Vec& x, const Vec&) { return Mat(2 * x.asDiagonal()); };
  Vec x0(1);
  x0 << 1.0;
  try {
    flow(s, x0, 0, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::FlowEscape);
  }
}
