#include "scabs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scabs/error.hpp"
#include "scabs/lp.hpp"

namespace scabs {

SupportSet::SupportSet(std::vector<HalfSpacePair> pairs)
    : sentinel_(Sentinel::None), pairs_(std::move(pairs)) {
  for (const auto& h : pairs_) {
    if (h.v.size() == 0 || h.v.isZero(0.0))
      throw Error(Errc::InvalidArgument, "support pair with zero normal");
  }
}

bool SupportSet::contains(const Vec& x, double tol) const {
  if (sentinel_ == Sentinel::EmptyPoly) return false;
  return std::all_of(pairs_.begin(), pairs_.end(),
                     [&](const HalfSpacePair& h) { return h.contains(x, tol); });
}

namespace {

double cross2(const Vec& a, const Vec& b) { return a(0) * b(1) - a(1) * b(0); }

bool in_ball(const Ball& b, const std::vector<Vec>& pts, double tol) {
  return std::all_of(pts.begin(), pts.end(),
                     [&](const Vec& p) { return (p - b.center).norm() <= b.radius + tol; });
}

}  // namespace

ConvexPolytope ConvexPolytope::from_vertices_2d(std::vector<Vec> ccw) {
  if (ccw.size() < 3) throw Error(Errc::InvalidArgument, "polygon needs at least 3 vertices");
  for (const auto& v : ccw)
    if (v.size() != 2) throw Error(Errc::InvalidArgument, "from_vertices_2d expects 2-D points");

  // Drop duplicates and collinear points until stable.
  bool changed = true;
  while (changed && ccw.size() >= 3) {
    changed = false;
    const std::size_t m = ccw.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Vec& prev = ccw[(i + m - 1) % m];
      const Vec& cur = ccw[i];
      const Vec& next = ccw[(i + 1) % m];
      const double scale = std::max((next - prev).norm(), 1.0);
      if ((cur - prev).norm() <= 1e-12 * scale ||
          std::abs(cross2(cur - prev, next - cur)) <= 1e-13 * scale * scale) {
        ccw.erase(ccw.begin() + static_cast<long>(i));
        changed = true;
        break;
      }
    }
  }
  if (ccw.size() < 3) throw Error(Errc::InvalidArgument, "degenerate polygon");

  double area2 = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) area2 += cross2(ccw[i], ccw[(i + 1) % ccw.size()]);
  if (area2 < 0.0) std::reverse(ccw.begin(), ccw.end());

  ConvexPolytope poly;
  poly.vertices_ = std::move(ccw);
  const std::size_t m = poly.vertices_.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec& a = poly.vertices_[i];
    const Vec& b = poly.vertices_[(i + 1) % m];
    Vec n(2);
    n << b(1) - a(1), a(0) - b(0);
    poly.facets_.push_back({a, n});
  }
  for (const auto& f : poly.facets_)
    for (const auto& v : poly.vertices_)
      if (!f.contains(v, tol_geom))
        throw Error(Errc::InvalidArgument, "polygon vertices are not convex");
  return poly;
}

bool ConvexPolytope::contains(const Vec& x, double tol) const {
  return std::all_of(facets_.begin(), facets_.end(),
                     [&](const HalfSpacePair& h) { return h.contains(x, tol); });
}

Vec ConvexPolytope::centroid() const {
  Vec c = Vec::Zero(dim());
  for (const auto& v : vertices_) c += v;
  return c / static_cast<double>(vertices_.size());
}

Ball ConvexPolytope::enclosing_ball() const {
  const Vec c = centroid();
  if (dim() != 2) {
    double r = 0.0;
    for (const auto& v : vertices_) r = std::max(r, (v - c).norm());
    return {c, r};
  }
  // Brute force over pair and triple circles; vertex counts are tiny.
  Ball best{c, std::numeric_limits<double>::infinity()};
  const std::size_t m = vertices_.size();
  auto consider = [&](const Ball& b) {
    if (b.radius < best.radius && in_ball(b, vertices_, 1e-12)) best = b;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      consider({(vertices_[i] + vertices_[j]) / 2.0, (vertices_[i] - vertices_[j]).norm() / 2.0});
      for (std::size_t k = j + 1; k < m; ++k) {
        const Vec& a = vertices_[i];
        const Vec b = vertices_[j] - a;
        const Vec d = vertices_[k] - a;
        const double den = 2.0 * cross2(b, d);
        if (std::abs(den) < 1e-15) continue;
        Vec u(2);
        u << (d(1) * b.squaredNorm() - b(1) * d.squaredNorm()) / den,
            (b(0) * d.squaredNorm() - d(0) * b.squaredNorm()) / den;
        consider({a + u, u.norm()});
      }
    }
  return best;
}

double ConvexPolytope::circumradius() const { return enclosing_ball().radius; }

Box ConvexPolytope::bounding_box() const {
  Box b{vertices_.front(), vertices_.front()};
  for (const auto& v : vertices_) {
    b.lo = b.lo.cwiseMin(v);
    b.hi = b.hi.cwiseMax(v);
  }
  return b;
}

ConvexPolytope ConvexPolytope::translated(const Vec& shift) const {
  ConvexPolytope out = *this;
  for (auto& v : out.vertices_) v += shift;
  for (auto& f : out.facets_) f.p += shift;
  return out;
}

ConvexPolytope ConvexPolytope::scaled(double factor) const {
  ConvexPolytope out = *this;
  for (auto& v : out.vertices_) v *= factor;
  for (auto& f : out.facets_) {
    f.p *= factor;
    f.v *= factor;
  }
  return out;
}

std::vector<Vec> ConvexPolytope::boundary_samples(int count) const {
  std::vector<Vec> out;
  double perimeter = 0.0;
  const std::size_t m = vertices_.size();
  for (std::size_t i = 0; i < m; ++i) perimeter += (vertices_[(i + 1) % m] - vertices_[i]).norm();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec& a = vertices_[i];
    const Vec& b = vertices_[(i + 1) % m];
    const int k = std::max(1, static_cast<int>(std::round(count * (b - a).norm() / perimeter)));
    for (int j = 0; j < k; ++j) out.push_back(a + (b - a) * (static_cast<double>(j) / k));
  }
  return out;
}

StronglyConvexSuperset::StronglyConvexSuperset(ConvexPolytope generator, double radius,
                                               std::vector<Ball> balls, std::vector<int> ball_facet,
                                               std::vector<int> flat_facets)
    : generator_(std::move(generator)),
      radius_(radius),
      balls_(std::move(balls)),
      ball_facet_(std::move(ball_facet)),
      flat_facets_(std::move(flat_facets)) {}

bool StronglyConvexSuperset::contains(const Vec& x, double tol) const {
  for (const auto& b : balls_)
    if ((x - b.center).norm() > b.radius + tol) return false;
  for (int f : flat_facets_)
    if (!generator_.facets()[f].contains(x, tol)) return false;
  return true;
}

double sagitta(double radius, double chord) {
  if (std::isinf(radius)) return 0.0;
  const double h = chord / 2.0;
  return radius - std::sqrt(std::max(0.0, radius * radius - h * h));
}

double StronglyConvexSuperset::max_sagitta() const {
  double s = 0.0;
  const auto& verts = generator_.vertices();
  for (int f : ball_facet_) {
    const double chord = (verts[(f + 1) % verts.size()] - verts[f]).norm();
    s = std::max(s, sagitta(radius_, chord));
  }
  return s;
}

std::vector<Vec> StronglyConvexSuperset::boundary_samples(int per_facet) const {
  std::vector<Vec> out;
  const auto& verts = generator_.vertices();
  const std::size_t m = verts.size();
  std::vector<int> ball_of(m, -1);
  for (std::size_t i = 0; i < ball_facet_.size(); ++i) ball_of[ball_facet_[i]] = static_cast<int>(i);
  for (std::size_t f = 0; f < m; ++f) {
    const Vec& a = verts[f];
    const Vec& b = verts[(f + 1) % m];
    if (ball_of[f] < 0) {
      for (int j = 0; j < per_facet; ++j) out.push_back(a + (b - a) * (static_cast<double>(j) / per_facet));
      continue;
    }
    const Ball& ball = balls_[ball_of[f]];
    const Vec da = a - ball.center;
    const Vec db = b - ball.center;
    const double t0 = std::atan2(da(1), da(0));
    double dt = std::atan2(db(1), db(0)) - t0;
    // Minor arc, traversed counterclockwise like the generator.
    while (dt <= -M_PI) dt += 2.0 * M_PI;
    while (dt > M_PI) dt -= 2.0 * M_PI;
    for (int j = 0; j < per_facet; ++j) {
      const double t = t0 + dt * (static_cast<double>(j) / per_facet);
      Vec p(2);
      p << ball.center(0) + ball.radius * std::cos(t), ball.center(1) + ball.radius * std::sin(t);
      out.push_back(p);
    }
  }
  return out;
}

StronglyConvexSuperset strongly_convex_hull(const ConvexPolytope& cell, double r,
                                            std::span<const int> flat_facets) {
  if (cell.dim() != 2) throw Error(Errc::InvalidArgument, "strongly_convex_hull is 2-D only");
  if (!(r > 0.0)) throw Error(Errc::InvalidArgument, "radius must be positive");
  const auto& verts = cell.vertices();
  const std::size_t m = verts.size();
  std::vector<int> flats(flat_facets.begin(), flat_facets.end());
  std::sort(flats.begin(), flats.end());
  if (std::isinf(r)) {
    flats.clear();
    for (std::size_t f = 0; f < m; ++f) flats.push_back(static_cast<int>(f));
    return StronglyConvexSuperset(cell, r, {}, {}, std::move(flats));
  }

  std::vector<Ball> balls;
  std::vector<int> ball_facet;
  for (std::size_t f = 0; f < m; ++f) {
    if (std::binary_search(flats.begin(), flats.end(), static_cast<int>(f))) continue;
    const Vec& a = verts[f];
    const Vec& b = verts[(f + 1) % m];
    const double chord = (b - a).norm();
    if (r < chord / 2.0)
      throw Error(Errc::CellTooLarge, "radius " + std::to_string(r) + " below half of edge length " +
                                          std::to_string(chord));
    const Vec n = cell.facets()[f].v.normalized();
    const double depth = std::sqrt(r * r - chord * chord / 4.0);
    Ball ball{(a + b) / 2.0 - depth * n, r};
    if (!in_ball(ball, verts, 1e-12 * std::max(1.0, r)))
      throw Error(Errc::CellTooLarge, "radius " + std::to_string(r) + " does not cover the cell");
    balls.push_back(std::move(ball));
    ball_facet.push_back(static_cast<int>(f));
  }
  return StronglyConvexSuperset(cell, r, std::move(balls), std::move(ball_facet), std::move(flats));
}

SupportSet supporting_approximation(const StronglyConvexSuperset& sup) {
  const auto& cell = sup.generator();
  const auto& verts = cell.vertices();
  const std::size_t m = verts.size();
  std::vector<int> ball_of(m, -1);
  for (std::size_t i = 0; i < sup.ball_facets().size(); ++i)
    ball_of[sup.ball_facets()[i]] = static_cast<int>(i);
  std::vector<HalfSpacePair> pairs;
  pairs.reserve(m);
  for (std::size_t f = 0; f < m; ++f) {
    const Vec& normal = cell.facets()[f].v;
    if (ball_of[f] < 0) {
      pairs.push_back({(verts[f] + verts[(f + 1) % m]) / 2.0, normal});
    } else {
      const Ball& b = sup.balls()[ball_of[f]];
      pairs.push_back({b.center + b.radius * normal.normalized(), normal});
    }
  }
  return SupportSet(std::move(pairs));
}

Feasibility feasible(std::span<const HalfSpacePair> constraints, const Vec& origin, double tol) {
  Feasibility out;
  const int n = static_cast<int>(origin.size());
  if (constraints.empty()) {
    out.status = Feasibility::Status::Feasible;
    out.witness = origin;
    return out;
  }
  Mat A(constraints.size(), n);
  Vec b(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    A.row(static_cast<long>(i)) = constraints[i].v.transpose();
    b(static_cast<long>(i)) = constraints[i].v.dot(constraints[i].p - origin);
  }
  lp::Options opts;
  opts.feasibility_tol = tol;
  const auto res = lp::find_feasible_point(A, b, opts);
  switch (res.status) {
    case lp::Status::Optimal:
      out.status = Feasibility::Status::Feasible;
      out.witness = res.x + origin;
      break;
    case lp::Status::Infeasible:
      out.status = Feasibility::Status::Infeasible;
      break;
    default:
      out.status = Feasibility::Status::Indeterminate;
      break;
  }
  return out;
}

Feasibility feasible(const SupportSet& a, const ConvexPolytope& b, double tol) {
  Feasibility out;
  switch (a.sentinel()) {
    case SupportSet::Sentinel::EmptyPoly:
      return out;
    case SupportSet::Sentinel::WholeSpace:
      out.status = Feasibility::Status::Feasible;
      out.witness = b.centroid();
      return out;
    case SupportSet::Sentinel::None:
      break;
  }
  std::vector<HalfSpacePair> all(a.pairs());
  all.insert(all.end(), b.facets().begin(), b.facets().end());
  return feasible(all, b.centroid(), tol);
}

std::optional<Box> polyhedron_bounds(std::span<const HalfSpacePair> constraints, const Vec& origin,
                                     double tol) {
  const int n = static_cast<int>(origin.size());
  const double inf = std::numeric_limits<double>::infinity();
  Box box{Vec::Constant(n, -inf), Vec::Constant(n, inf)};
  if (constraints.empty()) return box;
  Mat A(constraints.size(), n);
  Vec b(constraints.size());
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    A.row(static_cast<long>(i)) = constraints[i].v.transpose();
    b(static_cast<long>(i)) = constraints[i].v.dot(constraints[i].p - origin);
  }
  lp::Options opts;
  opts.feasibility_tol = tol;
  for (int d = 0; d < n; ++d) {
    for (double sign : {1.0, -1.0}) {
      Vec c = Vec::Zero(n);
      c(d) = sign;
      const auto res = lp::maximize(c, A, b, opts);
      if (res.status == lp::Status::Infeasible) return std::nullopt;
      if (res.status != lp::Status::Optimal) continue;  // leave infinite
      if (sign > 0)
        box.hi(d) = res.value + origin(d);
      else
        box.lo(d) = -res.value + origin(d);
    }
  }
  return box;
}

}  // namespace scabs

namespace scabs {

std::vector<Vec> clip_polygon_2d(const std::vector<Vec>& loop, const HalfSpacePair& h, double eps) {
  std::vector<Vec> out;
  const std::size_t n = loop.size();
  if (n == 0) return out;
  const double scale = h.v.norm();
  auto side = [&](const Vec& x) { return h.v.dot(x - h.p) / scale; };
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& a = loop[i];
    const Vec& b = loop[(i + 1) % n];
    const double sa = side(a), sb = side(b);
    if (sa <= eps) out.push_back(a);
    if ((sa < -eps && sb > eps) || (sa > eps && sb < -eps)) {
      const double t = sa / (sa - sb);
      out.push_back(a + t * (b - a));
    }
  }
  // drop consecutive duplicates
  std::vector<Vec> clean;
  for (const auto& v : out) {
    if (clean.empty() || (clean.back() - v).norm() > eps) clean.push_back(v);
  }
  while (clean.size() > 1 && (clean.front() - clean.back()).norm() <= eps) clean.pop_back();
  return clean;
}

std::vector<Vec> polygon_from_halfspaces_2d(std::span<const HalfSpacePair> constraints,
                                            const Box& box, double eps) {
  std::vector<Vec> loop(4, Vec(2));
  loop[0] << box.lo[0], box.lo[1];
  loop[1] << box.hi[0], box.lo[1];
  loop[2] << box.hi[0], box.hi[1];
  loop[3] << box.lo[0], box.hi[1];
  for (const auto& h : constraints) {
    loop = clip_polygon_2d(loop, h, eps);
    if (loop.empty()) break;
  }
  return loop;
}

double polygon_area_2d(const std::vector<Vec>& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec& p = loop[i];
    const Vec& q = loop[(i + 1) % loop.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * a;
}

}  // namespace scabs
