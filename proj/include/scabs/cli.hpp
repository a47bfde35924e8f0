#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "scabs/config.hpp"
#include "scabs/convexity.hpp"
#include "scabs/dynamics.hpp"
#include "scabs/quantizer.hpp"

namespace scabs {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitCertificate = 2;
inline constexpr int kExitInfeasible = 3;

/// Commands certify, abstract, synthesize, simulate and plot. Returns the
/// process exit code: 0 success, 2 certificate failure, 3 synthesis
/// infeasible, 1 any other error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

SystemModel build_system(const ProjectConfig& cfg);

struct CertifyReport {
  /// Certificates for horizons 1..N (steps, or multiples of T).
  std::vector<Certificate> per_horizon;
  /// Certificate covering the full horizon N.
  Certificate chosen;
  /// Superset radius used by the quantizer.
  double radius = 0.0;
  bool admissible = false;
};

CertifyReport certify(const ProjectConfig& cfg, const SystemModel& sys);

/// Quantizer described by the config with the given superset radius.
Quantizer build_quantizer(const ProjectConfig& cfg, double radius);

/// Quantizer document: lattice parameters, cell vertices, superset balls and
/// supporting pairs.
void write_quantizer(const Quantizer& q, std::ostream& out);

/// Worker count: the config value, else SCABS_THREADS, else the hardware.
int thread_count(const ProjectConfig& cfg);

}  // namespace scabs
