#pragma once

#include <Eigen/Dense>

namespace scabs::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Options {
  /// Every row a·x <= b is relaxed to a·x <= b + tol·|a| before solving.
  double feasibility_tol = 1e-8;
  int max_iterations = 10000;
};

struct Result {
  Status status = Status::Infeasible;
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
};

/// Phase-one simplex (Bland's rule) for the free-variable system A x <= b.
/// On success `x` holds a witness and status is Optimal.
Result find_feasible_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Options& opts = {});

/// Maximizes c·x subject to A x <= b with x free (two-phase simplex).
Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                const Eigen::VectorXd& b, const Options& opts = {});

}  // namespace scabs::lp
