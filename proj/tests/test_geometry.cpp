#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "scabs/error.hpp"
#include "scabs/geometry.hpp"

using namespace scabs;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ConvexPolytope square(double lo, double hi) {
  return ConvexPolytope::from_vertices_2d({v2(lo, lo), v2(hi, lo), v2(hi, hi), v2(lo, hi)});
}

ConvexPolytope hexagon(double s) {
  const double r3 = std::sqrt(3.0);
  return ConvexPolytope::from_vertices_2d({v2(0, -2 * s), v2(r3 * s, -s), v2(r3 * s, s),
                                           v2(0, 2 * s), v2(-r3 * s, s), v2(-r3 * s, -s)});
}

}  // namespace

TEST(Geometry, SingleHalfPlaneMeetsUnitSquare) {
  SupportSet a({{v2(0, 0), v2(1, 0)}});
  EXPECT_TRUE(feasible(a, square(0, 1)).feasible());
}

TEST(Geometry, DisjointSlabsAreInfeasible) {
  SupportSet a({{v2(0, 0), v2(1, 0)}, {v2(1, 0), v2(-1, 0)}});
  EXPECT_FALSE(feasible(a, square(-9, 9)).feasible());
}

TEST(Geometry, Sentinels) {
  EXPECT_FALSE(feasible(SupportSet::empty_poly(), square(0, 1)).feasible());
  EXPECT_TRUE(feasible(SupportSet::whole_space(), square(0, 1)).feasible());
  EXPECT_TRUE(SupportSet::whole_space().contains(v2(1e6, -1e6)));
  EXPECT_FALSE(SupportSet::empty_poly().contains(v2(0, 0)));
}

TEST(Geometry, RejectsZeroNormal) {
  EXPECT_THROW(SupportSet({{v2(0, 0), v2(0, 0)}}), Error);
}

TEST(Geometry, PolygonFacetsPointOutward) {
  auto sq = square(0, 1);
  ASSERT_EQ(sq.facets().size(), 4u);
  for (const auto& f : sq.facets()) EXPECT_LT(f.excess(sq.centroid()), 0);
  EXPECT_NEAR(sq.circumradius(), std::sqrt(0.5), 1e-12);
}

TEST(Geometry, ClockwiseInputIsReoriented) {
  auto p = ConvexPolytope::from_vertices_2d({v2(0, 0), v2(0, 1), v2(1, 1), v2(1, 0)});
  EXPECT_TRUE(p.contains(v2(0.5, 0.5)));
  EXPECT_FALSE(p.contains(v2(1.5, 0.5)));
}

TEST(Geometry, HexagonSagitta) {
  const double s = std::numbers::pi / (16 * std::sqrt(3.0));
  auto sup = strongly_convex_hull(hexagon(s), 0.4);
  EXPECT_NEAR(sup.max_sagitta(), 0.4 - std::sqrt(0.16 - s * s), 1e-12);
  EXPECT_NEAR(sup.max_sagitta(), 0.0164, 5e-4);
}

TEST(Geometry, SmallSquareGapAtLargeRadius) {
  auto sup = strongly_convex_hull(square(0, 0.1), 10.0);
  EXPECT_NEAR(sup.max_sagitta(), 1.25e-4, 1e-6);
}

TEST(Geometry, CellTooLargeForRadius) {
  try {
    strongly_convex_hull(square(0, 1), 0.4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CellTooLarge);
  }
}

TEST(Geometry, SupersetContainsCellAndSupportsIt) {
  const double s = std::numbers::pi / (16 * std::sqrt(3.0));
  auto cell = hexagon(s);
  auto sup = strongly_convex_hull(cell, 0.4);
  auto approx = supporting_approximation(sup);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-3 * s, 3 * s);
  for (int i = 0; i < 2000; ++i) {
    Vec x = v2(d(rng), d(rng));
    if (cell.contains(x)) EXPECT_TRUE(sup.contains(x));
    if (sup.contains(x)) EXPECT_TRUE(approx.contains(x));
  }
  for (const auto& b : sup.boundary_samples(16)) EXPECT_TRUE(approx.contains(b, 1e-9));
}

TEST(Geometry, FlatFacetStaysStraight) {
  std::vector<int> flat = {0};
  auto sup = strongly_convex_hull(square(0, 0.1), 1.0, flat);
  EXPECT_FALSE(sup.contains(v2(0.05, -1e-3)));
  EXPECT_TRUE(sup.contains(v2(-1e-3, 0.05)));
}

TEST(Geometry, PolyhedronBounds) {
  std::vector<HalfSpacePair> c = {{v2(1, 0), v2(1, 0)}, {v2(0, 0), v2(-1, 0)}, {v2(0, 2), v2(0, 1)}};
  auto box = polyhedron_bounds(c, v2(0, 0));
  ASSERT_TRUE(box.has_value());
  EXPECT_NEAR(box->lo[0], 0, 1e-6);
  EXPECT_NEAR(box->hi[0], 1, 1e-6);
  EXPECT_NEAR(box->hi[1], 2, 1e-6);
  EXPECT_TRUE(std::isinf(box->lo[1]));
}
