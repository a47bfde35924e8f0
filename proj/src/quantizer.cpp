#include "scabs/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "scabs/error.hpp"

namespace scabs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

int floordiv(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

// Lowest value of <v, x - p> over the box; -inf if unbounded below.
double min_over_box(const HalfSpacePair& h, const Box& box) {
  double m = -h.v.dot(h.p);
  for (Eigen::Index i = 0; i < h.v.size(); ++i) {
    if (h.v[i] == 0.0) continue;
    const double b = h.v[i] > 0 ? box.lo[i] : box.hi[i];
    if (std::isinf(b)) return -kInf;
    m += h.v[i] * b;
  }
  return m / h.v.norm();
}

Cell make_bounded_cell(CellId id, ConvexPolytope poly, double radius,
                       std::span<const int> flat_facets) {
  Cell c;
  c.id = id;
  c.region = poly.facets();
  c.bbox = poly.bounding_box();
  c.center = poly.centroid();
  if (id.kind == CellKind::Operating) {
    c.superset = strongly_convex_hull(poly, radius, flat_facets);
    c.support = supporting_approximation(*c.superset);
    if (poly.dim() == 2) {
      Box big{c.bbox.lo.array() - 1.0, c.bbox.hi.array() + 1.0};
      c.support_polygon = polygon_from_halfspaces_2d(c.support.pairs(), big);
      std::vector<Vec> loop;
      for (const auto& p : c.superset->boundary_samples(16)) {
        if (loop.empty() || (loop.back() - p).norm() > 1e-9) loop.push_back(p);
      }
      while (loop.size() > 1 && (loop.front() - loop.back()).norm() <= 1e-9) loop.pop_back();
      c.superset_inner = ConvexPolytope::from_vertices_2d(loop).facets();
    }
  }
  c.polytope = std::move(poly);
  return c;
}

Cell make_halfspace_cell(CellId id, HalfSpacePair h, int dim) {
  Cell c;
  c.id = id;
  c.region = {h};
  c.bbox = {Vec::Constant(dim, -kInf), Vec::Constant(dim, kInf)};
  // the bounding face coordinate is finite
  for (int i = 0; i < dim; ++i) {
    if (h.v[i] > 0 && h.v.cwiseAbs().sum() == std::abs(h.v[i])) c.bbox.hi[i] = h.p[i];
    if (h.v[i] < 0 && h.v.cwiseAbs().sum() == std::abs(h.v[i])) c.bbox.lo[i] = h.p[i];
  }
  c.center = h.p;
  return c;
}

}  // namespace

std::string to_string(CellKind kind) {
  switch (kind) {
    case CellKind::Operating: return "OPERATING";
    case CellKind::OverflowPos: return "OVERFLOW_POS";
    case CellKind::OverflowNeg: return "OVERFLOW_NEG";
    case CellKind::Obstacle: return "OBSTACLE";
  }
  return "UNKNOWN";
}

std::string to_string(const CellId& id) {
  switch (id.kind) {
    case CellKind::OverflowPos: return "overflow+" + (id.col ? std::to_string(id.col) : "");
    case CellKind::OverflowNeg: return "overflow-" + (id.col ? std::to_string(id.col) : "");
    default: return "(" + std::to_string(id.col) + "," + std::to_string(id.row) + ")";
  }
}

Quantizer::Quantizer(std::vector<Cell> cells, int periodic_axis, double period,
                     double superset_radius)
    : cells_(std::move(cells)), axis_(periodic_axis), period_(period), radius_(superset_radius) {
  if (cells_.empty()) return;
  dim_ = static_cast<int>(cells_.front().center.size());
  if (axis_ >= dim_ || (axis_ >= 0 && !(period_ > 0)))
    throw Error(Errc::InvalidArgument, "bad periodic axis or period");
  build_index();
}

void Quantizer::build_index() {
  grid_ = {Vec::Constant(dim_, kInf), Vec::Constant(dim_, -kInf)};
  int bounded = 0;
  for (int i = 0; i < size(); ++i) {
    const Cell& c = cells_[i];
    if (!c.polytope) {
      unbounded_.push_back(i);
      continue;
    }
    ++bounded;
    grid_.lo = grid_.lo.cwiseMin(c.bbox.lo);
    grid_.hi = grid_.hi.cwiseMax(c.bbox.hi);
  }
  if (bounded == 0) return;
  const int per = std::max(1, static_cast<int>(std::ceil(std::pow(bounded, 1.0 / dim_))));
  bins_per_dim_.assign(dim_, per);
  int total = 1;
  for (int d = 0; d < dim_; ++d) total *= per;
  bins_.assign(total, {});
  for (int i = 0; i < size(); ++i) {
    const Cell& c = cells_[i];
    if (!c.polytope) continue;
    std::vector<std::vector<int>> ranges(dim_);
    for (int d = 0; d < dim_; ++d) ranges[d] = bin_range(c.bbox.lo[d], c.bbox.hi[d], d);
    std::vector<int> idx(dim_, 0);
    for (;;) {
      int lin = 0;
      for (int d = dim_ - 1; d >= 0; --d) lin = lin * per + ranges[d][idx[d]];
      bins_[lin].push_back(i);
      int d = 0;
      for (; d < dim_; ++d) {
        if (++idx[d] < static_cast<int>(ranges[d].size())) break;
        idx[d] = 0;
      }
      if (d == dim_) break;
    }
  }
}

std::vector<int> Quantizer::bin_range(double lo, double hi, int d) const {
  std::vector<int> out;
  const int per = bins_per_dim_[d];
  const double width = (grid_.hi[d] - grid_.lo[d]) / per;
  if (hi < grid_.lo[d] - tol_geom || lo > grid_.hi[d] + tol_geom) return out;
  auto bin = [&](double x) {
    if (!(width > 0)) return 0;
    if (x <= grid_.lo[d]) return 0;
    if (x >= grid_.hi[d]) return per - 1;
    return std::clamp(static_cast<int>((x - grid_.lo[d]) / width), 0, per - 1);
  };
  for (int b = bin(lo - tol_geom); b <= bin(hi + tol_geom); ++b) out.push_back(b);
  return out;
}

int Quantizer::count(CellKind kind) const {
  return static_cast<int>(
      std::count_if(cells_.begin(), cells_.end(), [&](const Cell& c) { return c.kind() == kind; }));
}

std::optional<int> Quantizer::find(const CellId& id) const {
  for (int i = 0; i < size(); ++i) {
    if (cells_[i].id == id) return i;
    // obstacles keep their lattice position
    if (id.kind == CellKind::Operating && cells_[i].id.kind == CellKind::Obstacle &&
        cells_[i].id.col == id.col && cells_[i].id.row == id.row)
      return i;
  }
  return std::nullopt;
}

Vec Quantizer::shift_vector(int shift) const {
  Vec v = Vec::Zero(dim_);
  if (axis_ >= 0) v[axis_] = shift * period_;
  return v;
}

int Quantizer::shift_towards(const Vec& x, int cell) const {
  if (axis_ < 0) return 0;
  const Cell& c = cells_.at(cell);
  if (!c.polytope) return 0;
  return static_cast<int>(std::lround((x[axis_] - c.center[axis_]) / period_));
}

Vec Quantizer::wrap_to(const Vec& x, int cell) const {
  return x - shift_vector(shift_towards(x, cell));
}

std::vector<CellShift> Quantizer::query(const Box& box) const {
  std::set<CellShift> found;
  if (!bins_.empty()) {
    int k_lo = 0, k_hi = 0;
    if (axis_ >= 0) {
      if (std::isinf(box.lo[axis_]) || std::isinf(box.hi[axis_])) {
        k_lo = -1;
        k_hi = 1;
      } else {
        k_lo = static_cast<int>(std::ceil((box.lo[axis_] - grid_.hi[axis_]) / period_ - 1e-12));
        k_hi = static_cast<int>(std::floor((box.hi[axis_] - grid_.lo[axis_]) / period_ + 1e-12));
      }
    }
    for (int k = k_lo; k <= k_hi; ++k) {
      Box b = box;
      if (axis_ >= 0) {
        if (std::isinf(box.lo[axis_]) || std::isinf(box.hi[axis_])) {
          b.lo[axis_] = grid_.lo[axis_];
          b.hi[axis_] = grid_.hi[axis_];
        } else {
          b.lo[axis_] -= k * period_;
          b.hi[axis_] -= k * period_;
        }
      }
      std::vector<std::vector<int>> ranges(dim_);
      bool empty = false;
      for (int d = 0; d < dim_; ++d) {
        ranges[d] = bin_range(b.lo[d], b.hi[d], d);
        empty = empty || ranges[d].empty();
      }
      if (empty) continue;
      std::vector<int> idx(dim_, 0);
      for (;;) {
        int lin = 0;
        for (int d = dim_ - 1; d >= 0; --d) lin = lin * bins_per_dim_[d] + ranges[d][idx[d]];
        for (int i : bins_[lin]) {
          if (cells_[i].bbox.intersects(b, tol_geom)) found.insert({i, k});
        }
        int d = 0;
        for (; d < dim_; ++d) {
          if (++idx[d] < static_cast<int>(ranges[d].size())) break;
          idx[d] = 0;
        }
        if (d == dim_) break;
      }
    }
  }
  for (int i : unbounded_) {
    const bool meets = std::all_of(cells_[i].region.begin(), cells_[i].region.end(),
                                   [&](const HalfSpacePair& h) { return min_over_box(h, box) <= tol_geom; });
    if (meets) found.insert({i, 0});
  }
  return {found.begin(), found.end()};
}

std::vector<CellShift> Quantizer::candidate_cells(const std::vector<Vec>& probes,
                                                  double inflation) const {
  if (probes.empty()) return {};
  Box b{probes.front(), probes.front()};
  for (const auto& p : probes) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  b.lo.array() -= inflation;
  b.hi.array() += inflation;
  return query(b);
}

std::vector<int> Quantizer::locate(const Vec& x, double tol) const {
  std::vector<int> out;
  Box b{x, x};
  for (const auto& [i, k] : query(b)) {
    const Vec y = x - shift_vector(k);
    const Cell& c = cells_[i];
    const bool in = std::all_of(c.region.begin(), c.region.end(),
                                [&](const HalfSpacePair& h) { return h.contains(y, tol); });
    if (in) out.push_back(i);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int Quantizer::locate_first(const Vec& x, double tol) const {
  auto all = locate(x, tol);
  if (all.empty()) throw Error(Errc::InvalidArgument, "point is not covered by the quantizer");
  return all.front();
}

std::vector<CellShift> Quantizer::stencil(int cell) const {
  std::vector<CellShift> out;
  if (!lattice_) return out;
  const Cell& c = cells_.at(cell);
  if (!c.polytope) return out;
  const HexLattice& L = *lattice_;
  const int rows = L.row_max - L.row_min + 1;
  std::optional<int> over_pos, over_neg;
  for (int i = 0; i < size(); ++i) {
    if (cells_[i].kind() == CellKind::OverflowPos) over_pos = i;
    if (cells_[i].kind() == CellKind::OverflowNeg) over_neg = i;
  }
  bool above = false, below = false;
  for (int dr = -L.stencil; dr <= L.stencil; ++dr) {
    const int r = c.id.row + dr;
    if (r > L.row_max) {
      above = true;
      continue;
    }
    if (r < L.row_min) {
      below = true;
      continue;
    }
    for (int dc = -L.stencil; dc <= L.stencil; ++dc) {
      const int col = c.id.col + dc;
      const int home = col - floordiv(col, L.n_cols) * L.n_cols;
      const int idx = (r - L.row_min) * L.n_cols + home;
      out.push_back({idx, axis_ >= 0 ? floordiv(col, L.n_cols) : 0});
    }
  }
  (void)rows;
  if (below && over_neg) out.push_back({*over_neg, 0});
  if (above && over_pos) out.push_back({*over_pos, 0});
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Quantizer build_hex_quantizer(const HexQuantizerOptions& o) {
  if (!(o.s > 0) || !(o.strip_hi > o.strip_lo))
    throw Error(Errc::InvalidArgument, "hex quantizer needs s > 0 and a nonempty strip");
  const double r3 = std::sqrt(3.0);
  const double pitch = 2 * r3 * o.s;
  int n_cols = 1;
  if (o.period > 0) {
    const double q = o.period / pitch;
    n_cols = static_cast<int>(std::lround(q));
    if (std::abs(q - n_cols) > 1e-12 * std::max(1.0, q) || n_cols < 1)
      throw Error(Errc::InvalidArgument, "period is not a multiple of the column pitch");
  }
  const int row_min =
      static_cast<int>(std::floor((o.strip_lo - o.origin_y + 2 * o.s) / (3 * o.s)) - 1);
  const int row_max =
      static_cast<int>(std::ceil((o.strip_hi - o.origin_y - 2 * o.s) / (3 * o.s)) + 1);
  const std::vector<Vec> unit = {v2(0, -2), v2(r3, -1), v2(r3, 1), v2(0, 2), v2(-r3, 1), v2(-r3, -1)};
  const HalfSpacePair top{v2(0, o.strip_hi), v2(0, 1)};
  const HalfSpacePair bottom{v2(0, o.strip_lo), v2(0, -1)};

  std::vector<Cell> cells;
  int used_min = std::numeric_limits<int>::max(), used_max = std::numeric_limits<int>::min();
  std::vector<std::pair<int, std::vector<Vec>>> rows;
  for (int j = row_min; j <= row_max; ++j) {
    const double cy = o.origin_y + 3 * o.s * j;
    std::vector<Vec> loop;
    for (const auto& u : unit) loop.push_back(o.s * u + v2(0, cy));
    loop = clip_polygon_2d(loop, top);
    loop = clip_polygon_2d(loop, bottom);
    if (loop.size() < 3 || polygon_area_2d(loop) < 1e-12) continue;
    used_min = std::min(used_min, j);
    used_max = std::max(used_max, j);
    rows.emplace_back(j, loop);
  }
  for (const auto& [j, loop] : rows) {
    const double offset = (j % 2 != 0) ? r3 * o.s : 0.0;
    for (int c = 0; c < n_cols; ++c) {
      std::vector<Vec> shifted;
      for (const auto& p : loop) shifted.push_back(p + v2(o.origin_x + c * pitch + offset, 0));
      // the truncation facet is bent like the others: a flat cut would leave
      // the superset without strong convexity along the strip edge
      auto poly = ConvexPolytope::from_vertices_2d(shifted);
      CellId id{CellKind::Operating, c, j};
      if (std::find_if(o.obstacles.begin(), o.obstacles.end(), [&](const CellId& b) {
            return b.col == c && b.row == j;
          }) != o.obstacles.end())
        id.kind = CellKind::Obstacle;
      cells.push_back(make_bounded_cell(id, std::move(poly), o.radius, {}));
    }
  }
  cells.push_back(make_halfspace_cell({CellKind::OverflowNeg, 0, 0}, {v2(0, o.strip_lo), v2(0, 1)}, 2));
  cells.push_back(make_halfspace_cell({CellKind::OverflowPos, 0, 0}, {v2(0, o.strip_hi), v2(0, -1)}, 2));
  for (const auto& b : o.obstacles) {
    if (b.row < used_min || b.row > used_max || b.col < 0 || b.col >= n_cols)
      throw Error(Errc::InvalidArgument, "obstacle " + to_string(b) + " is not a lattice cell");
  }
  Quantizer q(std::move(cells), o.period > 0 ? 0 : -1, o.period, o.radius);
  q.set_lattice({o.s, n_cols, used_min, used_max, o.stencil});
  return q;
}

Quantizer build_pendulum_quantizer(double radius, std::vector<CellId> obstacles) {
  HexQuantizerOptions o;
  o.s = std::numbers::pi / (16 * std::sqrt(3.0));
  o.strip_lo = -std::numbers::pi;
  o.strip_hi = std::numbers::pi;
  o.period = 2 * std::numbers::pi;
  o.radius = radius;
  o.obstacles = std::move(obstacles);
  return build_hex_quantizer(o);
}

Quantizer build_box_quantizer(const Vec& lo, const Vec& hi, const std::vector<int>& counts, double radius) {
  if (lo.size() != 2 || hi.size() != 2 || counts.size() != 2)
    throw Error(Errc::InvalidArgument, "box quantizer is two-dimensional");
  std::vector<Cell> cells;
  const double hx = (hi[0] - lo[0]) / counts[0], hy = (hi[1] - lo[1]) / counts[1];
  for (int j = 0; j < counts[1]; ++j) {
    for (int i = 0; i < counts[0]; ++i) {
      const double x0 = lo[0] + i * hx, y0 = lo[1] + j * hy;
      auto poly = ConvexPolytope::from_vertices_2d(
          {v2(x0, y0), v2(x0 + hx, y0), v2(x0 + hx, y0 + hy), v2(x0, y0 + hy)});
      cells.push_back(make_bounded_cell({CellKind::Operating, i, j}, std::move(poly), radius, {}));
    }
  }
  // one overflow half-space per face, axis recorded in the column field
  for (int d = 0; d < 2; ++d) {
    Vec e = Vec::Zero(2);
    e[d] = 1;
    Vec plo = lo, phi = hi;
    cells.push_back(make_halfspace_cell({CellKind::OverflowNeg, d, 0}, {plo, e}, 2));
    cells.push_back(make_halfspace_cell({CellKind::OverflowPos, d, 0}, {phi, Vec(-e)}, 2));
  }
  return Quantizer(std::move(cells), -1, 0.0, radius);
}

std::uint64_t fingerprint(const Quantizer& q) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ p[i]) * 1099511628211ull;
  };
  for (const auto& c : q.cells()) {
    const int id[3] = {static_cast<int>(c.kind()), c.id.col, c.id.row};
    mix(id, sizeof id);
    if (!c.polytope) continue;
    for (const auto& v : c.polytope->vertices()) mix(v.data(), sizeof(double) * v.size());
  }
  return h;
}

}  // namespace scabs
