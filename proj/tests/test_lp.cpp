#include <gtest/gtest.h>

#include "scabs/lp.hpp"

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

TEST(Lp, FeasiblePointOfTriangle) {
  Mat A(3, 2);
  A << -1, 0, 0, -1, 1, 1;
  Vec b(3);
  b << 0, 0, 1;
  auto r = scabs::lp::find_feasible_point(A, b);
  ASSERT_EQ(r.status, scabs::lp::Status::Optimal);
  EXPECT_LE((A * r.x - b).maxCoeff(), 1e-7);
}

TEST(Lp, DetectsInfeasibleSlabs) {
  Mat A(2, 1);
  A << 1, -1;
  Vec b(2);
  b << -1, -1;  // x <= -1 and x >= 1
  auto r = scabs::lp::find_feasible_point(A, b);
  EXPECT_EQ(r.status, scabs::lp::Status::Infeasible);
}

TEST(Lp, MaximizesOverSquare) {
  Mat A(4, 2);
  A << 1, 0, -1, 0, 0, 1, 0, -1;
  Vec b = Vec::Ones(4);
  Vec c(2);
  c << 2, 3;
  auto r = scabs::lp::maximize(c, A, b);
  ASSERT_EQ(r.status, scabs::lp::Status::Optimal);
  EXPECT_NEAR(r.value, 5.0, 1e-6);
}

TEST(Lp, ReportsUnbounded) {
  Mat A(1, 2);
  A << 1, 0;
  Vec b(1);
  b << 1;
  Vec c(2);
  c << 0, 1;
  auto r = scabs::lp::maximize(c, A, b);
  EXPECT_EQ(r.status, scabs::lp::Status::Unbounded);
}
