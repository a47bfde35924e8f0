#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "scabs/quantizer.hpp"
#include "scabs/supervisor.hpp"

namespace scabs {

/// Phase portrait of a 2-D quantizer: cells, shaded winning cells, target
/// and start cells, hatched obstacles, the target ellipse and trajectories.
struct PhasePlot {
  const Quantizer* quantizer = nullptr;
  std::vector<char> winning;  // per cell, may be empty
  std::vector<char> target;
  std::vector<char> start;
  std::optional<Ellipsoid> ellipse;
  std::vector<std::vector<Vec>> trajectories;
  double width_px = 900.0;
};

void write_phase_svg(const PhasePlot& plot, std::ostream& out);

}  // namespace scabs
