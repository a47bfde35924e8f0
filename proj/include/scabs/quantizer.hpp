#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "scabs/geometry.hpp"

namespace scabs {

enum class CellKind { Operating, OverflowPos, OverflowNeg, Obstacle };

std::string to_string(CellKind kind);

struct CellId {
  CellKind kind = CellKind::Operating;
  int col = 0;
  int row = 0;

  auto operator<=>(const CellId&) const = default;
};

std::string to_string(const CellId& id);

struct Cell {
  CellId id;
  /// Bounded geometry; absent for overflow cells.
  std::optional<ConvexPolytope> polytope;
  /// Half-spaces whose intersection is the cell.
  std::vector<HalfSpacePair> region;
  /// Bounding box in the home chart (infinite along unbounded directions).
  Box bbox;
  Vec center;
  std::optional<StronglyConvexSuperset> superset;
  /// Sigma of the superset for cells in C'; whole space otherwise.
  SupportSet support;
  /// Vertex loop of P(support) in 2-D.
  std::vector<Vec> support_polygon;
  /// Facets of a polygon inscribed in the superset (2-D, arcs sampled).
  std::vector<HalfSpacePair> superset_inner;

  CellKind kind() const { return id.kind; }
  bool in_operating_range() const { return id.kind == CellKind::Operating; }
};

/// A cell together with the number of periods its home copy is shifted by.
struct CellShift {
  int cell = 0;
  int shift = 0;

  auto operator<=>(const CellShift&) const = default;
};

struct HexLattice {
  double s = 0.0;
  int n_cols = 0;
  int row_min = 0;
  int row_max = 0;
  int stencil = 3;
};

/// Covering of the state space by cells. Cells are indexed row-major
/// (operating and obstacle cells), followed by the overflow cells. At most
/// one coordinate may be periodic; cell geometry lives in a home chart and
/// copies are obtained by shifting along that axis.
class Quantizer {
 public:
  Quantizer() = default;
  Quantizer(std::vector<Cell> cells, int periodic_axis, double period, double superset_radius);

  int size() const { return static_cast<int>(cells_.size()); }
  int dim() const { return dim_; }
  const Cell& cell(int i) const { return cells_.at(i); }
  const std::vector<Cell>& cells() const { return cells_; }
  /// -1 when no coordinate is periodic.
  int periodic_axis() const { return axis_; }
  double period() const { return period_; }
  double superset_radius() const { return radius_; }
  int count(CellKind kind) const;
  std::optional<int> find(const CellId& id) const;

  /// shift * period along the periodic axis.
  Vec shift_vector(int shift) const;
  /// x translated by whole periods to lie closest to the home copy of `cell`.
  Vec wrap_to(const Vec& x, int cell) const;
  /// Periods to subtract from x to bring it next to the home copy of `cell`.
  int shift_towards(const Vec& x, int cell) const;

  /// Every cell containing x (any periodic copy), ascending index.
  std::vector<int> locate(const Vec& x, double tol = tol_geom) const;
  /// Lowest-index cell containing x.
  int locate_first(const Vec& x, double tol = tol_geom) const;

  /// Cells with a periodic copy whose bounding box meets `box`.
  std::vector<CellShift> query(const Box& box) const;
  /// Cells meeting the bounding box of the probes inflated by `inflation`.
  std::vector<CellShift> candidate_cells(const std::vector<Vec>& probes, double inflation) const;
  /// Fixed index neighbourhood of an operating cell (hex lattice only);
  /// shifts are relative to the home copy of `cell`.
  std::vector<CellShift> stencil(int cell) const;

  const std::optional<HexLattice>& lattice() const { return lattice_; }
  void set_lattice(HexLattice lat) { lattice_ = lat; }

 private:
  void build_index();
  std::vector<int> bin_range(double lo, double hi, int d) const;

  std::vector<Cell> cells_;
  int dim_ = 0;
  int axis_ = -1;
  double period_ = 0.0;
  double radius_ = 0.0;
  std::optional<HexLattice> lattice_;
  // uniform bins over the bounded cells' bounding box
  Box grid_;
  std::vector<int> bins_per_dim_;
  std::vector<std::vector<int>> bins_;
  std::vector<int> unbounded_;
};

struct HexQuantizerOptions {
  double s = 0.0;
  double strip_lo = 0.0;
  double strip_hi = 0.0;
  double period = 0.0;
  /// Superset radius; must cover the cells.
  double radius = 0.4;
  std::vector<CellId> obstacles;
  int stencil = 3;
  /// Center of cell (0, 0).
  double origin_x = 0.0;
  double origin_y = 0.0;
};

/// Pointy-top hexagons of size s on the cylinder with x2 clipped to the
/// strip. Columns have pitch 2 sqrt(3) s, rows have pitch 3s and odd rows are
/// shifted by sqrt(3) s. The origin is a cell center.
Quantizer build_hex_quantizer(const HexQuantizerOptions& opts);

/// The pendulum quantizer: s = pi/(16 sqrt 3), strip [-pi, pi], period 2 pi.
Quantizer build_pendulum_quantizer(double radius = 0.4, std::vector<CellId> obstacles = {});

/// Axis-aligned box cells over [lo, hi] with `counts` cells per axis and one
/// overflow half-space per face. With an infinite radius the supersets equal
/// the cells; otherwise every facet is bent into an arc of that radius.
Quantizer build_box_quantizer(const Vec& lo, const Vec& hi, const std::vector<int>& counts,
                              double radius = std::numeric_limits<double>::infinity());

/// FNV-1a hash of cell ids, kinds and vertex coordinates.
std::uint64_t fingerprint(const Quantizer& q);

}  // namespace scabs
