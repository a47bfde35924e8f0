#include "scabs/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "scabs/error.hpp"

namespace scabs {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

void check_guard(const Vec& y, int guard_dim, double max_norm) {
  for (int i = 0; i < guard_dim; ++i) {
    if (!std::isfinite(y[i]) || std::abs(y[i]) > max_norm)
      throw Error(Errc::FlowEscape, "trajectory left the admissible region");
  }
  for (int i = guard_dim; i < y.size(); ++i) {
    if (!std::isfinite(y[i])) throw Error(Errc::FlowEscape, "non-finite state");
  }
}

FlowResult integrate_rk4(const OdeRhs& f, Vec y, double t, const IntegratorOptions& opts,
                         int guard_dim) {
  const int m = std::max(1, opts.fixed_steps);
  const double h = t / m;
  Vec k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size());
  for (int i = 0; i < m; ++i) {
    f(y, k1);
    f(y + 0.5 * h * k1, k2);
    f(y + 0.5 * h * k2, k3);
    f(y + h * k3, k4);
    y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    check_guard(y, guard_dim, opts.max_norm);
  }
  FlowResult r;
  r.x_end = std::move(y);
  r.steps_taken = m;
  return r;
}

}  // namespace

FlowResult integrate_ode(const OdeRhs& f, Vec y, double t, const IntegratorOptions& opts,
                         int guard_dim) {
  if (t < 0) throw Error(Errc::InvalidArgument, "negative integration time");
  check_guard(y, guard_dim, opts.max_norm);
  if (t == 0) {
    FlowResult r;
    r.x_end = std::move(y);
    return r;
  }
  if (opts.fixed_step) return integrate_rk4(f, std::move(y), t, opts, guard_dim);

  const Eigen::Index m = y.size();
  Vec k1(m), k2(m), k3(m), k4(m), k5(m), k6(m), k7(m), ynew(m), tmp(m);
  f(y, k1);
  double h = std::min(t, 0.05);
  double tau = 0.0;
  long steps = 0;
  double max_err = 0.0;
  while (tau < t) {
    if (steps >= opts.max_steps) throw Error(Errc::FlowEscape, "step budget exhausted");
    bool last = false;
    if (tau + h >= t) {
      h = t - tau;
      last = true;
    }
    tmp = y + h * a21 * k1;
    f(tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(tmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(ynew, k7);
    tmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double sc =
          opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(tmp[i]) / sc);
    }
    if (!std::isfinite(err)) err = 1e10;
    ++steps;
    if (err <= 1.0) {
      tau = last ? t : tau + h;
      y.swap(ynew);
      k1.swap(k7);
      check_guard(y, guard_dim, opts.max_norm);
      max_err = std::max(max_err, err);
      const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      if (h < opts.h_min) throw Error(Errc::FlowEscape, "step size underflow");
    }
  }
  FlowResult r;
  r.x_end = std::move(y);
  r.steps_taken = steps;
  r.est_error = max_err;
  return r;
}

int state_dim(const SystemModel& sys) {
  return std::visit([](const auto& s) { return s.n; }, sys);
}

int num_inputs(const SystemModel& sys) {
  return std::visit([](const auto& s) { return s.num_inputs(); }, sys);
}

const std::optional<Vec>& period_of(const SystemModel& sys) {
  return std::visit([](const auto& s) -> const std::optional<Vec>& { return s.period; }, sys);
}

std::string input_name(const SystemModel& sys, int u) {
  return std::visit([u](const auto& s) { return s.input_names.at(u); }, sys);
}

FlowResult flow_detailed(const SampledSystem& sys, const Vec& x0, int u, double t) {
  const Vec& uv = sys.inputs.at(u);
  auto f = [&](const Vec& y, Vec& dy) { dy = sys.rhs(y, uv); };
  return integrate_ode(f, x0, t, sys.integrator, sys.n);
}

Vec flow(const SampledSystem& sys, const Vec& x0, int u, double t) {
  return flow_detailed(sys, x0, u, t).x_end;
}

Vec flow_word(const SampledSystem& sys, const Vec& x0, std::span<const int> word, double t) {
  if (word.empty()) throw Error(Errc::InvalidArgument, "empty input word");
  Vec x = x0;
  double left = t;
  for (std::size_t k = 0; k < word.size() && left > 0; ++k) {
    const double dt = (k + 1 == word.size()) ? left : std::min(left, sys.T);
    x = flow(sys, x, word[k], dt);
    left -= dt;
  }
  return x;
}

Mat flow_jacobian(const SampledSystem& sys, const Vec& x0, int u, double t) {
  const int n = sys.n;
  const Vec& uv = sys.inputs.at(u);
  Vec y0(n + n * n);
  y0.head(n) = x0;
  Eigen::Map<Mat>(y0.data() + n, n, n) = Mat::Identity(n, n);
  auto f = [&](const Vec& y, Vec& dy) {
    dy.resize(y.size());
    const Vec x = y.head(n);
    dy.head(n) = sys.rhs(x, uv);
    const Mat J = sys.rhs_jac(x, uv);
    Eigen::Map<Mat>(dy.data() + n, n, n) = J * Eigen::Map<const Mat>(y.data() + n, n, n);
  };
  const FlowResult r = integrate_ode(f, y0, t, sys.integrator, n);
  return Eigen::Map<const Mat>(r.x_end.data() + n, n, n);
}

Vec step(const SystemModel& sys, const Vec& x, int u) {
  if (const auto* d = std::get_if<DiscreteSystem>(&sys)) return d->step(x, u);
  const auto& s = std::get<SampledSystem>(sys);
  return flow(s, x, u, s.T);
}

Mat step_jacobian(const SystemModel& sys, const Vec& x, int u) {
  if (const auto* d = std::get_if<DiscreteSystem>(&sys)) return d->jacobian(x, u);
  const auto& s = std::get<SampledSystem>(sys);
  return flow_jacobian(s, x, u, s.T);
}

HalfSpacePair comp_ext_discrete(const DiscreteSystem& sys, int u, const HalfSpacePair& pair,
                                double cond_cap) {
  const Mat J = sys.jacobian(pair.p, u);
  Eigen::JacobiSVD<Mat> svd(J);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0) || smax / smin > cond_cap)
    throw Error(Errc::SingularJacobian, "Jacobian is singular or badly conditioned");
  HalfSpacePair out;
  out.p = sys.step(pair.p, u);
  out.v = J.transpose().partialPivLu().solve(pair.v);
  return out;
}

HalfSpacePair comp_ext_sampled(const SampledSystem& sys, int u, const HalfSpacePair& pair) {
  const int n = sys.n;
  const Vec& uv = sys.inputs.at(u);
  Vec y0(2 * n);
  y0 << pair.p, pair.v;
  auto f = [&](const Vec& y, Vec& dy) {
    dy.resize(2 * n);
    const Vec x = y.head(n);
    dy.head(n) = sys.rhs(x, uv);
    dy.tail(n) = -sys.rhs_jac(x, uv).transpose() * y.tail(n);
  };
  const FlowResult r = integrate_ode(f, y0, sys.T, sys.integrator, n);
  HalfSpacePair out;
  out.p = r.x_end.head(n);
  out.v = r.x_end.tail(n);
  return out;
}

HalfSpacePair comp_ext(const SystemModel& sys, int u, const HalfSpacePair& pair) {
  if (const auto* d = std::get_if<DiscreteSystem>(&sys)) return comp_ext_discrete(*d, u, pair);
  return comp_ext_sampled(std::get<SampledSystem>(sys), u, pair);
}

namespace {

// State layout: x | y = D2phi h | z = D2^2 phi h^2 | J (n x n).
void second_variation_segment(const SampledSystem& sys, int u, double dt, Vec& state) {
  const int n = sys.n;
  const Vec& uv = sys.inputs.at(u);
  auto f = [&](const Vec& s, Vec& ds) {
    ds.resize(s.size());
    const Vec x = s.head(n);
    const Vec y = s.segment(n, n);
    const Mat J = sys.rhs_jac(x, uv);
    const std::vector<Mat> H = sys.rhs_hess(x, uv);
    ds.head(n) = sys.rhs(x, uv);
    ds.segment(n, n) = J * y;
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = y.dot(H[i] * y);
    ds.segment(2 * n, n) = J * s.segment(2 * n, n) + q;
    Eigen::Map<Mat>(ds.data() + 3 * n, n, n) = J * Eigen::Map<const Mat>(s.data() + 3 * n, n, n);
  };
  state = integrate_ode(f, state, dt, sys.integrator, n).x_end;
}

}  // namespace

SecondVariation second_variation_word(const SampledSystem& sys, const Vec& x0,
                                      std::span<const int> word, const Vec& h, double t) {
  if (!sys.rhs_hess) throw Error(Errc::HessianUnavailable, "system has no second derivative");
  if (word.empty()) throw Error(Errc::InvalidArgument, "empty input word");
  const int n = sys.n;
  Vec s = Vec::Zero(3 * n + n * n);
  s.head(n) = x0;
  s.segment(n, n) = h;
  Eigen::Map<Mat>(s.data() + 3 * n, n, n) = Mat::Identity(n, n);
  double left = t;
  for (std::size_t k = 0; k < word.size() && left > 0; ++k) {
    const double dt = (k + 1 == word.size()) ? left : std::min(left, sys.T);
    second_variation_segment(sys, word[k], dt, s);
    left -= dt;
  }
  SecondVariation out;
  out.x = s.head(n);
  out.y = s.segment(n, n);
  out.z = s.segment(2 * n, n);
  out.jac = Eigen::Map<const Mat>(s.data() + 3 * n, n, n);
  return out;
}

Vec second_variation_transport(const SampledSystem& sys, const Vec& x0, int u, const Vec& h,
                               double t) {
  const int word[1] = {u};
  return second_variation_word(sys, x0, word, h, t).z;
}

SampledSystem make_pendulum(double omega, double gamma, double T, std::vector<double> inputs) {
  if (!(T > 0)) throw Error(Errc::InvalidArgument, "sampling time must be positive");
  SampledSystem s;
  s.n = 2;
  s.T = T;
  for (double u : inputs) {
    Vec uv(1);
    uv << u;
    s.inputs.push_back(uv);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", u);
    s.input_names.emplace_back(buf);
  }
  const double w2 = omega * omega;
  s.rhs = [w2, gamma](const Vec& x, const Vec& u) {
    Vec dx(2);
    dx << x[1], -w2 * std::sin(x[0]) - u[0] * w2 * std::cos(x[0]) - 2 * gamma * x[1];
    return dx;
  };
  s.rhs_jac = [w2, gamma](const Vec& x, const Vec& u) {
    Mat J(2, 2);
    J << 0, 1, -w2 * std::cos(x[0]) + u[0] * w2 * std::sin(x[0]), -2 * gamma;
    return J;
  };
  s.rhs_hess = [w2](const Vec& x, const Vec& u) {
    std::vector<Mat> H(2, Mat::Zero(2, 2));
    H[1](0, 0) = w2 * std::sin(x[0]) + u[0] * w2 * std::cos(x[0]);
    return H;
  };
  Vec per(2);
  per << 2 * std::numbers::pi, 0.0;
  s.period = per;
  return s;
}

}  // namespace scabs
