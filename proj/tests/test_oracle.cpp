#include <gtest/gtest.h>

#include <random>

#include "scabs/abstraction.hpp"
#include "scabs/error.hpp"
#include "scabs/oracle.hpp"

using namespace scabs;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Mat rot(double th) {
  Mat R(2, 2);
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return R;
}

LinearSystem random_affine(std::mt19937_64& rng, int m) {
  std::uniform_real_distribution<double> U(0, 1);
  LinearSystem s;
  for (int u = 0; u < m; ++u) {
    Mat D = Mat::Zero(2, 2);
    D(0, 0) = 0.6 + 0.8 * U(rng);
    D(1, 1) = 0.6 + 0.8 * U(rng);
    const Mat P = rot(2 * M_PI * U(rng));
    s.A.push_back(rot(2 * M_PI * U(rng)) * P * D * P.transpose());
    s.b.push_back(v2(2 * U(rng) - 1, 2 * U(rng) - 1));
  }
  return s;
}

const Quantizer& boxes() {
  static const Quantizer q = build_box_quantizer(v2(-3, -3), v2(3, 3), {6, 6});
  return q;
}

// max over a of min over b |a - b|, symmetrized
double vertex_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  auto one = [](const std::vector<Vec>& x, const std::vector<Vec>& y) {
    double d = 0;
    for (const auto& p : x) {
      double best = 1e300;
      for (const auto& r : y) best = std::min(best, (p - r).norm());
      d = std::max(d, best);
    }
    return d;
  };
  return std::max(one(a, b), one(b, a));
}

}  // namespace

TEST(Oracle, IdentityKeepsCell) {
  LinearSystem id{{Mat::Identity(2, 2)}, {Vec::Zero(2)}};
  const auto& q = boxes();
  const int c = q.locate_first(v2(0.5, 0.5));
  auto m = exact_window_set(id, q, std::vector<int>{c, c, c, c}, std::vector<int>{0, 0, 0});
  EXPECT_NEAR(std::abs(polygon_area_2d(m)), 1.0, 1e-12);
  EXPECT_LT(vertex_distance(m, q.cell(c).polytope->vertices()), 1e-12);
}

TEST(Oracle, QuarterTurnOfSquare) {
  LinearSystem r{{rot(M_PI / 2)}, {Vec::Zero(2)}};
  const auto& q = boxes();
  const int c = q.locate_first(v2(0.5, 0.5));
  const int left = q.locate_first(v2(-0.5, 0.5));
  auto m = exact_window_set(r, q, std::vector<int>{c, left}, std::vector<int>{0});
  EXPECT_LT(vertex_distance(m, {v2(-1, 0), v2(0, 0), v2(0, 1), v2(-1, 1)}), 1e-12);
  // the image only touches the original cell along x1 = 0
  auto edge = exact_window_set(r, q, std::vector<int>{c, c}, std::vector<int>{0});
  ASSERT_FALSE(edge.empty());
  EXPECT_NEAR(polygon_area_2d(edge), 0.0, 1e-12);
  const int far = q.locate_first(v2(2.5, 2.5));
  EXPECT_TRUE(exact_window_set(r, q, std::vector<int>{c, far}, std::vector<int>{0}).empty());
}

TEST(Oracle, RecursionMatchesIntersectionForm) {
  std::mt19937_64 rng(9);
  const auto& q = boxes();
  int nonempty = 0;
  for (int t = 0; t < 20; ++t) {
    auto sys = random_affine(rng, 2);
    std::uniform_int_distribution<int> cell(0, 35), in(0, 1);
    for (int k = 0; k < 200; ++k) {
      std::vector<int> cells{cell(rng)};
      std::vector<int> inputs;
      for (int j = 0; j < 3; ++j) {
        inputs.push_back(in(rng));
        // follow an image point so that many windows are nonempty
        const Vec c = q.cell(cells.back()).center;
        auto next = q.locate(sys.step(c, inputs.back()));
        int pick = next.front();
        if (!q.cell(pick).in_operating_range()) pick = cell(rng);
        cells.push_back(pick);
      }
      auto a = exact_window_set(sys, q, cells, inputs);
      auto b = exact_window_set_intersection(sys, q, cells, inputs);
      ASSERT_EQ(a.empty(), b.empty());
      if (a.empty()) continue;
      ++nonempty;
      EXPECT_NEAR(polygon_area_2d(a), polygon_area_2d(b), 1e-10);
      EXPECT_LT(vertex_distance(a, b), 1e-9);
    }
  }
  EXPECT_GT(nonempty, 100);
}

TEST(Oracle, RejectsLongWindows) {
  LinearSystem id{{Mat::Identity(2, 2)}, {Vec::Zero(2)}};
  std::vector<int> cells(8, 0), inputs(7, 0);
  EXPECT_THROW(exact_window_set(id, boxes(), cells, inputs), Error);
}

TEST(Oracle, LinearAbstractionIsExact) {
  std::mt19937_64 rng(21);
  auto q = std::make_shared<const Quantizer>(boxes());
  for (int t = 0; t < 3; ++t) {
    auto ls = random_affine(rng, 2);
    auto a = build_abstraction(to_discrete(ls), q, 1, radius_discrete(1, 0, 1));
    for (int c0 = 0; c0 < 36; ++c0) {
      for (int u = 0; u < 2; ++u) {
        for (int c1 = 0; c1 < q->size(); ++c1) {
          const std::vector<int> cells{c0, c1}, inputs{u};
          ASSERT_EQ(a.window_feasible(cells, inputs), !exact_window_set(ls, *q, cells, inputs).empty())
              << "system " << t << " cells " << c0 << "," << c1;
        }
      }
    }
  }
}

TEST(Oracle, ZeroSpanGivesOccupiedCells) {
  LinearSystem id{{Mat::Identity(2, 2)}, {Vec::Zero(2)}};
  const auto& q = boxes();
  auto w = sampled_behavior(to_discrete(id), q, 0, 0, {6, 1});
  EXPECT_EQ(w.size(), 36u);
  for (const auto& x : w) {
    EXPECT_EQ(x.cells.size(), 1u);
    EXPECT_TRUE(x.inputs.empty());
  }
}

TEST(Oracle, ContractionGivesSelfWindow) {
  const Quantizer q = build_box_quantizer(v2(0, 0), v2(1, 1), {1, 1});
  LinearSystem s{{0.5 * Mat::Identity(2, 2)}, {v2(0.25, 0.25)}};
  auto w = sampled_behavior(to_discrete(s), q, 1, 50, {5, 3});
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w.begin()->cells, (std::vector<int>{0, 0}));
}

TEST(Oracle, PendulumSamplesAreFeasible) {
  auto q = std::make_shared<const Quantizer>(build_pendulum_quantizer());
  auto sys = make_pendulum(1, 0.01, 0.2);
  auto a = build_abstraction(sys, q, 1, radius_pendulum(1, 0.01, 2, 0.6));
  auto w = sampled_behavior(sys, *q, 1, 300, {15, 2});
  EXPECT_GT(w.size(), 500u);
  int misses = 0;
  for (const auto& x : w) misses += !a.window_feasible(x.cells, x.inputs);
  EXPECT_EQ(misses, 0);
}

TEST(Oracle, FiniteDifferenceJacobians) {
  const Box region{v2(0, -M_PI), v2(2 * M_PI, M_PI)};
  auto pend = make_pendulum(1, 0.01, 0.2);
  auto rep = fd_jacobian_check(pend, region, 200);
  EXPECT_TRUE(rep.passed) << rep.worst_error;
  EXPECT_EQ(rep.probes, 200);

  std::mt19937_64 rng(4);
  auto lin = fd_jacobian_check(to_discrete(random_affine(rng, 2)), region, 50);
  EXPECT_TRUE(lin.passed);
  EXPECT_LT(lin.worst_error, 1e-8);

  auto broken = pend;
  broken.rhs_jac = [j = pend.rhs_jac](const Vec& x, const Vec& u) {
    Mat J = j(x, u);
    J(1, 1) += 0.1;
    return J;
  };
  auto bad = fd_jacobian_check(broken, region, 20);
  EXPECT_FALSE(bad.passed);
  EXPECT_GT(bad.worst_error, 1e-3);
}
