#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace scabs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Tolerance for geometric membership tests.
inline constexpr double tol_geom = 1e-9;

/// The half-space {x : <v, x - p> <= 0}. The normal is not required to be unit length.
struct HalfSpacePair {
  Vec p;
  Vec v;

  /// Signed violation <v, x - p> / |v|; positive means outside.
  double excess(const Vec& x) const { return v.dot(x - p) / v.norm(); }
  bool contains(const Vec& x, double tol = tol_geom) const { return excess(x) <= tol; }
  HalfSpacePair translated(const Vec& shift) const { return {p + shift, v}; }
};

/// A finite set of half-space pairs. The two sentinels stand for the empty
/// pair set (whole space) and the set of all pairs (empty polyhedron).
class SupportSet {
 public:
  enum class Sentinel { None, WholeSpace, EmptyPoly };

  SupportSet() : sentinel_(Sentinel::WholeSpace) {}
  explicit SupportSet(std::vector<HalfSpacePair> pairs);

  static SupportSet whole_space() { return SupportSet(); }
  static SupportSet empty_poly() {
    SupportSet s;
    s.sentinel_ = Sentinel::EmptyPoly;
    return s;
  }

  Sentinel sentinel() const { return sentinel_; }
  const std::vector<HalfSpacePair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }

  /// Membership in P(S).
  bool contains(const Vec& x, double tol = tol_geom) const;

 private:
  Sentinel sentinel_;
  std::vector<HalfSpacePair> pairs_;
};

struct Box {
  Vec lo;
  Vec hi;

  bool intersects(const Box& o, double pad = 0.0) const {
    return ((lo.array() - pad) <= o.hi.array()).all() && ((o.lo.array() - pad) <= hi.array()).all();
  }
  bool contains(const Vec& x, double pad = 0.0) const {
    return ((lo.array() - pad) <= x.array()).all() && (x.array() <= (hi.array() + pad)).all();
  }
};

struct Ball {
  Vec center;
  double radius = 0.0;
};

/// Bounded convex polytope carrying both a vertex and a facet description.
/// In 2-D, vertices are counterclockwise and facet i joins vertex i to i+1.
class ConvexPolytope {
 public:
  ConvexPolytope() = default;

  /// Builds a 2-D polygon from counterclockwise vertices. Collinear and
  /// duplicate vertices are removed.
  static ConvexPolytope from_vertices_2d(std::vector<Vec> ccw);

  int dim() const { return vertices_.empty() ? 0 : static_cast<int>(vertices_.front().size()); }
  const std::vector<Vec>& vertices() const { return vertices_; }
  const std::vector<HalfSpacePair>& facets() const { return facets_; }
  bool contains(const Vec& x, double tol = tol_geom) const;
  Vec centroid() const;
  /// Radius of the smallest enclosing ball (exact in 2-D).
  double circumradius() const;
  Ball enclosing_ball() const;
  Box bounding_box() const;
  ConvexPolytope translated(const Vec& shift) const;
  ConvexPolytope scaled(double factor) const;
  /// Evenly spaced points along the boundary (2-D).
  std::vector<Vec> boundary_samples(int count) const;

 private:
  std::vector<Vec> vertices_;
  std::vector<HalfSpacePair> facets_;
};

/// Strongly convex superset of a polytope: the intersection of equal-radius
/// balls (one per curved facet) and flat cuts (facets kept straight).
/// An infinite radius means the superset equals the polytope.
class StronglyConvexSuperset {
 public:
  StronglyConvexSuperset() = default;
  StronglyConvexSuperset(ConvexPolytope generator, double radius, std::vector<Ball> balls,
                         std::vector<int> ball_facet, std::vector<int> flat_facets);

  const ConvexPolytope& generator() const { return generator_; }
  double radius() const { return radius_; }
  const std::vector<Ball>& balls() const { return balls_; }
  /// Index of the generator facet each ball is attached to.
  const std::vector<int>& ball_facets() const { return ball_facet_; }
  const std::vector<int>& flat_facets() const { return flat_facets_; }

  bool contains(const Vec& x, double tol = tol_geom) const;
  /// Largest chord-to-arc gap over all curved facets.
  double max_sagitta() const;
  /// Dense samples of the boundary (2-D): arcs and flat pieces.
  std::vector<Vec> boundary_samples(int per_facet) const;

 private:
  ConvexPolytope generator_;
  double radius_ = 0.0;
  std::vector<Ball> balls_;
  std::vector<int> ball_facet_;
  std::vector<int> flat_facets_;
};

/// r - sqrt(r^2 - (chord/2)^2).
double sagitta(double radius, double chord);

/// Smallest intersection of radius-r balls containing a 2-D cell; facets in
/// `flat_facets` stay straight. Throws CellTooLarge when r cannot cover the cell.
StronglyConvexSuperset strongly_convex_hull(const ConvexPolytope& cell, double r,
                                            std::span<const int> flat_facets = {});

/// One supporting pair per facet: the outermost arc point with the outward
/// facet normal (flat facets are supported on their midpoint).
SupportSet supporting_approximation(const StronglyConvexSuperset& sup);

struct Feasibility {
  enum class Status { Feasible, Infeasible, Indeterminate };
  Status status = Status::Infeasible;
  std::optional<Vec> witness;

  /// Indeterminate counts as feasible.
  bool feasible() const { return status != Status::Infeasible; }
};

/// Decides whether P(constraints) is nonempty. `origin` recenters the problem
/// for conditioning and does not change the answer.
Feasibility feasible(std::span<const HalfSpacePair> constraints, const Vec& origin,
                     double tol = 1e-8);

/// P(A) ∩ B ≠ ∅.
Feasibility feasible(const SupportSet& a, const ConvexPolytope& b, double tol = 1e-8);

/// Axis-aligned bounding box of P(constraints) by 2n linear programs.
/// Unbounded directions get infinite bounds; nullopt means P is empty.
std::optional<Box> polyhedron_bounds(std::span<const HalfSpacePair> constraints, const Vec& origin,
                                     double tol = 1e-8);

/// Cuts a convex 2-D polygon (vertex loop) by the half-plane of `h`
/// (Sutherland-Hodgman step). Returns an empty loop when nothing remains.
std::vector<Vec> clip_polygon_2d(const std::vector<Vec>& loop, const HalfSpacePair& h,
                                 double eps = 1e-12);

/// Vertex loop of P(constraints) ∩ box in 2-D; empty when the intersection is.
std::vector<Vec> polygon_from_halfspaces_2d(std::span<const HalfSpacePair> constraints,
                                            const Box& box, double eps = 1e-12);

/// Area of a vertex loop (shoelace).
double polygon_area_2d(const std::vector<Vec>& loop);

}  // namespace scabs
