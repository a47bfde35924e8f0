#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "scabs/dynamics.hpp"
#include "scabs/quantizer.hpp"

namespace scabs {

/// Affine step x -> A[u] x + b[u] with nonsingular A[u].
struct LinearSystem {
  std::vector<Mat> A;
  std::vector<Vec> b;

  int num_inputs() const { return static_cast<int>(A.size()); }
  Vec step(const Vec& x, int u) const { return A.at(u) * x + b.at(u); }
};

DiscreteSystem to_discrete(const LinearSystem& sys);

/// Exact 2-D window set M_k by the recursion M_j = Delta_j ∩ G(M_{j-1}, u_{j-1}).
/// Returns the vertex loop (possibly degenerate), empty when M_k is empty.
/// All cells but the last must be bounded; windows are limited to 6 inputs.
std::vector<Vec> exact_window_set(const LinearSystem& sys, const Quantizer& q,
                                  std::span<const int> cells, std::span<const int> inputs);

/// The same set as the intersection over j of the images of Delta_j carried
/// forward to the last sample.
std::vector<Vec> exact_window_set_intersection(const LinearSystem& sys, const Quantizer& q,
                                               std::span<const int> cells,
                                               std::span<const int> inputs);

struct Window {
  std::vector<int> cells;
  std::vector<int> inputs;

  auto operator<=>(const Window&) const = default;
};

struct SampledBehaviorOptions {
  /// Grid points per axis over the operating cells' bounding box.
  int grid = 20;
  std::uint64_t seed = 1;
};

/// Windows of N inputs observed along trajectories from a grid plus
/// `n_init` random initial points, under every input word of length N. Every
/// cell choice on quantizer boundaries is expanded. Trajectories that leave
/// the integrator's range are cut at the last good sample.
std::set<Window> sampled_behavior(const SystemModel& sys, const Quantizer& q, int N, int n_init,
                                  const SampledBehaviorOptions& opts = {});

struct FdReport {
  double worst_error = 0.0;
  Vec worst_point;
  int worst_input = -1;
  int probes = 0;
  bool passed = true;
};

/// Compares the supplied Jacobian (D1 G for discrete systems, D1 F for sampled
/// ones) with central differences at step 1e-6 scaled by max(1, |x_i|).
/// Error is |J - J_fd|_F / max(1, |J|_F); passing needs <= 1e-5 everywhere.
FdReport fd_jacobian_check(const SystemModel& sys, const Box& region, int n_probes,
                           std::uint64_t seed = 1);

}  // namespace scabs
