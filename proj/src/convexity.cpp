#include "scabs/convexity.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "scabs/error.hpp"

namespace scabs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec h(n);
  do {
    for (int i = 0; i < n; ++i) h[i] = g(rng);
  } while (h.norm() < 1e-12);
  return h / h.norm();
}

}  // namespace

std::string to_string(CertKind kind) {
  switch (kind) {
    case CertKind::DiscreteL1L2: return "DISCRETE_L1L2";
    case CertKind::ContinuousM1M2: return "CONTINUOUS_M1M2";
    case CertKind::ContinuousC2: return "CONTINUOUS_C2";
    case CertKind::PendulumClosedForm: return "PENDULUM_CLOSED_FORM";
  }
  return "UNKNOWN";
}

void require_valid(const Certificate& cert) {
  if (!cert.valid) throw Error(Errc::ConditionsViolated, cert.reason);
}

Certificate radius_discrete(double L1, double L2, int N) {
  if (!(L1 > 0) || !(L2 >= 0) || N < 1)
    throw Error(Errc::InvalidArgument, "radius_discrete needs L1 > 0, L2 >= 0, N >= 1");
  Certificate c;
  c.kind = CertKind::DiscreteL1L2;
  c.horizon = N;
  c.bounds = {{"L1", L1}, {"L2", L2}};
  double sum = 0.0, pw = 1.0;
  for (int k = 0; k < N; ++k) {
    sum += pw;
    pw *= L1;
  }
  c.r_max = L2 == 0.0 ? kInf : 1.0 / (L2 * sum);
  c.valid = c.r_max > 0;
  return c;
}

Certificate radius_continuous(double M1, double M2, double t) {
  if (!(M2 >= 0) || !(t > 0))
    throw Error(Errc::InvalidArgument, "radius_continuous needs M2 >= 0, t > 0");
  Certificate c;
  c.kind = CertKind::ContinuousM1M2;
  c.horizon = t;
  c.bounds = {{"M1", M1}, {"M2", M2}};
  if (M2 == 0.0) {
    c.r_max = kInf;
  } else if (M1 == 0.0) {
    c.r_max = 1.0 / (M2 * t);
  } else {
    c.r_max = M1 / (M2 * std::expm1(M1 * t));
  }
  c.valid = c.r_max > 0;
  return c;
}

Certificate radius_c2(double L2, double t) {
  if (!(L2 >= 0)) throw Error(Errc::InvalidArgument, "radius_c2 needs L2 >= 0");
  Certificate c;
  c.kind = CertKind::ContinuousC2;
  c.horizon = t;
  c.bounds = {{"L2", L2}};
  c.r_max = L2 == 0.0 ? kInf : 1.0 / L2;
  c.valid = true;
  return c;
}

Certificate radius_pendulum(double omega, double gamma, double u_hat, double t) {
  if (!(t > 0)) throw Error(Errc::InvalidArgument, "radius_pendulum needs t > 0");
  Certificate c;
  c.kind = CertKind::PendulumClosedForm;
  c.horizon = t;
  const double wh = std::max(1.0, std::abs(omega) * std::pow(1.0 + u_hat * u_hat, 0.25));
  c.bounds = {{"omega_hat", wh}, {"gamma", gamma}, {"u_hat", u_hat}};
  if (gamma < 0 || gamma > 0.75 * wh) {
    c.reason = "damping condition 0 <= gamma <= 3/4 omega_hat fails";
    return c;
  }
  if (2.0 * std::sqrt(wh * wh - gamma * gamma) * t > M_PI) {
    c.reason = "time condition 2 sqrt(omega_hat^2 - gamma^2) t <= pi fails";
    return c;
  }
  const double num = 12.0 * wh * wh * std::pow(1.0 + (wh + gamma) * (wh + gamma), -1.5);
  const double den = std::sinh(3.0 * wh * t) +
                     std::sinh(wh * t) * (12.0 * std::pow(1.0 / (wh * wh) + 1.0, -1.5) - 3.0);
  c.r_max = num / den;
  c.valid = c.r_max > 0;
  if (!c.valid) c.reason = "closed form is not positive";
  return c;
}

RegionSampler box_sampler(const Box& box) {
  return [box](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Vec x(box.lo.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = box.lo[i] + d(rng) * (box.hi[i] - box.lo[i]);
    return x;
  };
}

RegionSampler forward_tube_sampler(const SystemModel& sys, RegionSampler base, int N) {
  return [sys, base = std::move(base), N](std::mt19937_64& rng) {
    std::uniform_int_distribution<int> len(0, std::max(0, N - 1));
    std::uniform_int_distribution<int> pick(0, num_inputs(sys) - 1);
    for (;;) {
      Vec x = base(rng);
      const int k = len(rng);
      try {
        for (int i = 0; i < k; ++i) x = step(sys, x, pick(rng));
        return x;
      } catch (const Error& e) {
        if (e.code() != Errc::FlowEscape) throw;
      }
    }
  };
}

DiscreteBounds estimate_bounds_discrete(const SystemModel& sys, const RegionSampler& tube,
                                        const EstimateOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  const int n = state_dim(sys);
  const int m = num_inputs(sys);
  DiscreteBounds b;
  for (int s = 0; s < opts.n_samples; ++s) {
    const Vec x = tube(rng);
    const int u = s % m;
    const Mat J = step_jacobian(sys, x, u);
    Eigen::JacobiSVD<Mat> svd(J);
    const auto& sv = svd.singularValues();
    const double amin = sv(sv.size() - 1);
    if (!(amin > 1e-12 * sv(0))) throw Error(Errc::SingularJacobian, "singular Jacobian in tube");
    b.L1 = std::max(b.L1, sv(0) * sv(0) / amin);
    const Vec h = opts.probe * random_unit(n, rng);
    const Mat Jh = step_jacobian(sys, x + h, u);
    const Mat D = J.partialPivLu().solve(Jh) - Mat::Identity(n, n);
    const double q = D.operatorNorm() / h.norm();
    // quotients at the level of integration noise are zero curvature
    if (q > 1e-6) b.L2 = std::max(b.L2, q);
  }
  b.L1 *= opts.safety;
  b.L2 *= opts.safety;
  return b;
}

ContinuousBounds estimate_bounds_continuous(const SampledSystem& sys, const RegionSampler& region,
                                            const EstimateOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  ContinuousBounds b;
  b.M1 = -kInf;
  for (int s = 0; s < opts.n_samples; ++s) {
    const Vec x = region(rng);
    for (const Vec& u : sys.inputs) {
      const Mat J = sys.rhs_jac(x, u);
      const Mat S = 0.5 * (J + J.transpose());
      Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      b.M1 = std::max(b.M1, 2.0 * ev(ev.size() - 1) - ev(0));
      const Vec h = opts.probe * random_unit(sys.n, rng);
      const double q = (sys.rhs_jac(x + h, u) - J).operatorNorm() / h.norm();
      b.M2 = std::max(b.M2, q);
    }
  }
  b.M1 = b.M1 >= 0 ? b.M1 * opts.safety : b.M1 / opts.safety;
  b.M2 *= opts.safety;
  return b;
}

double estimate_L2_integral(const SampledSystem& sys, const RegionSampler& region, double t,
                            const EstimateOptions& opts) {
  if (!sys.rhs_hess) throw Error(Errc::HessianUnavailable, "system has no second derivative");
  std::mt19937_64 rng(opts.seed);
  const int len = std::max(1, static_cast<int>(std::ceil(t / sys.T - 1e-12)));
  std::uniform_int_distribution<int> pick(0, sys.num_inputs() - 1);
  constexpr int kDeltas = 4;
  double best = 0.0;
  for (int s = 0; s < opts.n_samples; ++s) {
    const Vec x = region(rng);
    const Vec h = random_unit(sys.n, rng);
    std::vector<int> word(len);
    for (int& w : word) w = pick(rng);
    for (int k = 1; k <= kDeltas; ++k) {
      const double delta = t * k / kDeltas;
      try {
        const SecondVariation sv = second_variation_word(sys, x, word, h, delta);
        best = std::max(best, sv.jac.partialPivLu().solve(sv.z).norm());
      } catch (const Error& e) {
        if (e.code() != Errc::FlowEscape) throw;
      }
    }
  }
  return best * opts.safety;
}

GridSizing grid_sizing(double r_max, const ConvexPolytope& Y, double template_radius, const Box& K,
                       double slack, const Mat& lattice_basis) {
  if (!(template_radius > 0)) throw Error(Errc::InvalidArgument, "template radius must be positive");
  const auto Yhat = strongly_convex_hull(Y, template_radius);
  double extent = 0.0;  // max norm over Y_hat
  for (const Vec& p : Yhat.boundary_samples(64)) extent = std::max(extent, p.norm());
  GridSizing g;
  const double by_radius = std::isinf(template_radius) ? kInf : r_max / template_radius;
  g.lambda_max = std::min(by_radius, slack / extent);
  if (std::isinf(g.lambda_max)) g.lambda_max = 1.0;
  constexpr int kMinExponent = -40;
  double lambda = 1.0;
  while (lambda > g.lambda_max && std::ilogb(lambda) > kMinExponent) lambda *= 0.5;
  // the slack condition is strict
  if (lambda * extent >= slack) lambda *= 0.5;
  if (!(g.lambda_max > 0) || lambda > g.lambda_max || std::ilogb(lambda) <= kMinExponent ||
      lambda * extent >= slack)
    throw Error(Errc::NoAdmissibleScale, "no admissible scale for the quantizer template");
  g.lambda = lambda;

  const int n = static_cast<int>(K.lo.size());
  const Mat B = lambda * lattice_basis;
  const Mat Binv = B.inverse();
  const double pad = lambda * Y.circumradius();
  // integer index ranges from the padded box corners
  Eigen::VectorXi lo = Eigen::VectorXi::Constant(n, std::numeric_limits<int>::max());
  Eigen::VectorXi hi = Eigen::VectorXi::Constant(n, std::numeric_limits<int>::min());
  for (int mask = 0; mask < (1 << n); ++mask) {
    Vec c(n);
    for (int i = 0; i < n; ++i) c[i] = (mask >> i & 1) ? K.hi[i] + pad : K.lo[i] - pad;
    const Vec z = Binv * c;
    for (int i = 0; i < n; ++i) {
      lo[i] = std::min(lo[i], static_cast<int>(std::floor(z[i])));
      hi[i] = std::max(hi[i], static_cast<int>(std::ceil(z[i])));
    }
  }
  Eigen::VectorXi idx = lo;
  for (;;) {
    const Vec p = B * idx.cast<double>();
    if (K.contains(p, pad)) g.translations.push_back(p);
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[i] <= hi[i]) break;
      idx[i] = lo[i];
    }
    if (i == n) break;
  }
  return g;
}

}  // namespace scabs
