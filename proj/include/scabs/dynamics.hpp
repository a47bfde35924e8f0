#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "scabs/geometry.hpp"

namespace scabs {

struct IntegratorOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  double h_min = 1e-13;
  double max_norm = 1e8;
  long max_steps = 1'000'000;
  /// Classical RK4 with `fixed_steps` equal steps per call instead of the
  /// adaptive embedded pair.
  bool fixed_step = false;
  int fixed_steps = 200;
};

using VectorField = std::function<Vec(const Vec& x, const Vec& u)>;
using JacobianField = std::function<Mat(const Vec& x, const Vec& u)>;
/// hess[i] is the Hessian of the i-th component of F with respect to x.
using HessianField = std::function<std::vector<Mat>(const Vec& x, const Vec& u)>;

/// Explicit map x+ = G(x, u) over a finite input alphabet.
struct DiscreteSystem {
  int n = 0;
  std::vector<std::string> input_names;
  std::function<Vec(const Vec& x, int u)> step;
  std::function<Mat(const Vec& x, int u)> jacobian;
  /// Spatial period of the dynamics (cylinder identification), if any.
  std::optional<Vec> period;

  int num_inputs() const { return static_cast<int>(input_names.size()); }
};

/// Continuous right-hand side sampled with period T under constant inputs.
struct SampledSystem {
  int n = 0;
  std::vector<Vec> inputs;
  std::vector<std::string> input_names;
  VectorField rhs;
  JacobianField rhs_jac;
  HessianField rhs_hess;  // optional
  double T = 0.0;
  std::optional<Vec> period;
  IntegratorOptions integrator;

  int num_inputs() const { return static_cast<int>(inputs.size()); }
};

using SystemModel = std::variant<DiscreteSystem, SampledSystem>;

int state_dim(const SystemModel& sys);
int num_inputs(const SystemModel& sys);
const std::optional<Vec>& period_of(const SystemModel& sys);
std::string input_name(const SystemModel& sys, int u);

struct FlowResult {
  Vec x_end;
  Vec y_end;
  long steps_taken = 0;
  double est_error = 0.0;
};

using OdeRhs = std::function<void(const Vec& y, Vec& dy)>;

/// Integrates an autonomous ODE from 0 to t. The first `guard_dim`
/// components are monitored for escape. Throws FlowEscape.
FlowResult integrate_ode(const OdeRhs& f, Vec y0, double t, const IntegratorOptions& opts,
                         int guard_dim);

/// G(x, u).
Vec step(const SystemModel& sys, const Vec& x, int u);
/// D1 G(x, u); the sampled case integrates the variational equation.
Mat step_jacobian(const SystemModel& sys, const Vec& x, int u);

/// (G(p), (D1G(p)^-1)^* v) by one linear solve. Throws SingularJacobian.
HalfSpacePair comp_ext_discrete(const DiscreteSystem& sys, int u, const HalfSpacePair& pair,
                                double cond_cap = 1e12);

/// (x(T), y(T)) of x' = F(x,u), y' = -D1F(x,u)^* y, x(0) = p, y(0) = v.
HalfSpacePair comp_ext_sampled(const SampledSystem& sys, int u, const HalfSpacePair& pair);

HalfSpacePair comp_ext(const SystemModel& sys, int u, const HalfSpacePair& pair);

/// phi(t, x0, u) for a constant input.
Vec flow(const SampledSystem& sys, const Vec& x0, int u, double t);
FlowResult flow_detailed(const SampledSystem& sys, const Vec& x0, int u, double t);

/// phi(t, x0, w) where w applies word[k] on [kT, (k+1)T); the last input is
/// held for any remainder.
Vec flow_word(const SampledSystem& sys, const Vec& x0, std::span<const int> word, double t);

/// D2 phi(t, x0, u) from the variational equation.
Mat flow_jacobian(const SampledSystem& sys, const Vec& x0, int u, double t);

/// z(t) = D2^2 phi(t, x0, u) h^2 from the joint variational and second
/// variation systems. Throws HessianUnavailable.
Vec second_variation_transport(const SampledSystem& sys, const Vec& x0, int u, const Vec& h,
                               double t);

struct SecondVariation {
  Vec x;  // phi(t)
  Vec y;  // D2 phi(t) h
  Vec z;  // D2^2 phi(t) h^2
  Mat jac;  // D2 phi(t)
};

/// Second variation along a piecewise-constant input word.
SecondVariation second_variation_word(const SampledSystem& sys, const Vec& x0,
                                      std::span<const int> word, const Vec& h, double t);

/// Cart pendulum x1' = x2, x2' = -w^2 sin x1 - u w^2 cos x1 - 2 g x2 on the
/// cylinder with period (2 pi, 0).
SampledSystem make_pendulum(double omega, double gamma, double T,
                            std::vector<double> inputs = {0.0, -2.0, 2.0});

}  // namespace scabs
