#pragma once

#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "scabs/dynamics.hpp"
#include "scabs/geometry.hpp"

namespace scabs {

enum class CertKind { DiscreteL1L2, ContinuousM1M2, ContinuousC2, PendulumClosedForm };

std::string to_string(CertKind kind);

/// Admissible strong-convexity radius with the constants it was derived from.
struct Certificate {
  CertKind kind = CertKind::PendulumClosedForm;
  /// Steps for the discrete kind, time otherwise.
  double horizon = 0.0;
  std::map<std::string, double> bounds;
  double r_max = 0.0;
  bool valid = false;
  /// Bounds came from sampling rather than a derivation.
  bool estimated = false;
  std::string reason;

  bool unbounded() const { return r_max == std::numeric_limits<double>::infinity(); }
};

/// Throws ConditionsViolated with the stored reason unless `cert.valid`.
void require_valid(const Certificate& cert);

/// r L2 sum_{tau<N} L1^tau <= 1.
Certificate radius_discrete(double L1, double L2, int N);
/// r M2 int_0^t exp(M1 rho) d rho <= 1.
Certificate radius_continuous(double M1, double M2, double t);
/// r L2 <= 1 with L2 bounding the second-variation integral.
Certificate radius_c2(double L2, double t);
/// Closed form for the cart pendulum. Invalid (with reason) when a side
/// condition fails.
Certificate radius_pendulum(double omega, double gamma, double u_hat, double t);

/// Draws one point of a region.
using RegionSampler = std::function<Vec(std::mt19937_64&)>;

/// Uniform samples of a box.
RegionSampler box_sampler(const Box& box);

/// Points of psi([0;N), region, U): a base sample pushed through a random
/// input word of random length below N.
RegionSampler forward_tube_sampler(const SystemModel& sys, RegionSampler base, int N);

struct DiscreteBounds {
  double L1 = 0.0;
  double L2 = 0.0;
};

struct ContinuousBounds {
  double M1 = 0.0;
  double M2 = 0.0;
};

struct EstimateOptions {
  int n_samples = 500;
  double safety = 1.05;
  double probe = 1e-4;
  std::uint64_t seed = 1;
};

/// Sampled L1 = max alpha+^2 / alpha- and L2 = max |J(x)^-1 J(x+h) - I| / |h|.
DiscreteBounds estimate_bounds_discrete(const SystemModel& sys, const RegionSampler& tube,
                                        const EstimateOptions& opts = {});

/// Sampled M1 = max(2 mu+ - mu-) of the symmetric part of D1F and M2 as the
/// Lipschitz quotient of D1F.
ContinuousBounds estimate_bounds_continuous(const SampledSystem& sys, const RegionSampler& region,
                                            const EstimateOptions& opts = {});

/// Sampled bound on |D2phi(d)^-1 z(d)| over unit h, inputs and d in (0, t].
double estimate_L2_integral(const SampledSystem& sys, const RegionSampler& region, double t,
                            const EstimateOptions& opts = {});

struct GridSizing {
  double lambda = 0.0;  // largest admissible dyadic scale
  double lambda_max = 0.0;
  std::vector<Vec> translations;
};

/// Scale for copies of the template `Y` (whose strongly convex superset has
/// radius `template_radius` at unit scale) such that lambda * template_radius
/// <= r_max and lambda * |Y_hat| < slack. Translations are lattice points of
/// lambda * basis whose scaled cell meets `K`. Throws NoAdmissibleScale.
GridSizing grid_sizing(double r_max, const ConvexPolytope& Y, double template_radius, const Box& K,
                       double slack, const Mat& lattice_basis);

}  // namespace scabs
