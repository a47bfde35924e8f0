#include "scabs/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace scabs::lp {
namespace {

constexpr double kPivotEps = 1e-11;

// Dense simplex tableau over nonnegative variables in standard equality form.
// Column layout: [x+ (n) | x- (n) | slack (m) | artificial (k) | rhs].
class Tableau {
 public:
  Tableau(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol) {
    n_ = static_cast<int>(A.cols());
    const int m_in = static_cast<int>(A.rows());
    std::vector<int> keep;
    keep.reserve(m_in);
    for (int i = 0; i < m_in; ++i) {
      const double norm = A.row(i).norm();
      if (norm == 0.0) {
        if (b(i) + tol < 0.0) trivially_infeasible_ = true;
        continue;
      }
      keep.push_back(i);
    }
    m_ = static_cast<int>(keep.size());
    int n_art = 0;
    std::vector<double> rhs(m_);
    for (int r = 0; r < m_; ++r) {
      const int i = keep[r];
      const double norm = A.row(i).norm();
      rhs[r] = b(i) / norm + tol;
      if (rhs[r] < 0.0) ++n_art;
    }
    slack0_ = 2 * n_;
    art0_ = slack0_ + m_;
    cols_ = art0_ + n_art;
    t_ = Eigen::MatrixXd::Zero(m_ + 1, cols_ + 1);
    basis_.assign(m_, -1);
    int art = art0_;
    for (int r = 0; r < m_; ++r) {
      const int i = keep[r];
      const double norm = A.row(i).norm();
      const double sign = rhs[r] < 0.0 ? -1.0 : 1.0;
      for (int j = 0; j < n_; ++j) {
        const double a = A(i, j) / norm * sign;
        t_(r, j) = a;
        t_(r, n_ + j) = -a;
      }
      t_(r, slack0_ + r) = sign;
      t_(r, cols_) = rhs[r] * sign;
      if (sign < 0.0) {
        t_(r, art) = 1.0;
        basis_[r] = art++;
      } else {
        basis_[r] = slack0_ + r;
      }
    }
  }

  bool trivially_infeasible() const { return trivially_infeasible_; }
  int rows() const { return m_; }

  // Sets the objective row for minimizing cost·z, expressed in the current basis.
  void set_cost(const std::vector<double>& cost) {
    t_.row(m_).setZero();
    for (int j = 0; j < cols_; ++j) t_(m_, j) = cost[j];
    for (int r = 0; r < m_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb != 0.0) t_.row(m_) -= cb * t_.row(r);
    }
  }

  // Runs Bland's-rule iterations. Columns j >= limit never enter.
  Status iterate(int limit, int max_iter, int& iterations) {
    while (true) {
      if (iterations >= max_iter) return Status::IterationLimit;
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (t_(m_, j) < -kPivotEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int r = 0; r < m_; ++r) {
        const double a = t_(r, enter);
        if (a > kPivotEps) {
          const double ratio = t_(r, cols_) / a;
          if (ratio < best - 1e-14 ||
              (std::abs(ratio - best) <= 1e-14 && leave >= 0 && basis_[r] < basis_[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(leave, enter);
      ++iterations;
    }
  }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  // Pivots zero-level artificials out of the basis where possible.
  void drive_out_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < art0_) continue;
      for (int j = 0; j < art0_; ++j) {
        if (std::abs(t_(r, j)) > 1e-9) {
          pivot(r, j);
          break;
        }
      }
    }
  }

  double objective() const { return -t_(m_, cols_); }
  int cols() const { return cols_; }
  int art0() const { return art0_; }
  int n() const { return n_; }

  Eigen::VectorXd solution() const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(cols_);
    for (int r = 0; r < m_; ++r) z(basis_[r]) = t_(r, cols_);
    Eigen::VectorXd x(n_);
    for (int j = 0; j < n_; ++j) x(j) = z(j) - z(n_ + j);
    return x;
  }

 private:
  int n_ = 0, m_ = 0, cols_ = 0, slack0_ = 0, art0_ = 0;
  bool trivially_infeasible_ = false;
  Eigen::MatrixXd t_;
  std::vector<int> basis_;
};

Status phase_one(Tableau& tab, const Options& opts, int& iterations) {
  if (tab.trivially_infeasible()) return Status::Infeasible;
  std::vector<double> cost(tab.cols(), 0.0);
  for (int j = tab.art0(); j < tab.cols(); ++j) cost[j] = 1.0;
  tab.set_cost(cost);
  const Status s = tab.iterate(tab.cols(), opts.max_iterations, iterations);
  if (s == Status::IterationLimit) return s;
  // The relaxation by feasibility_tol leaves a strictly positive margin, so a
  // feasible system drives the artificial sum to round-off level.
  if (tab.objective() > 1e-9) return Status::Infeasible;
  tab.drive_out_artificials();
  return Status::Optimal;
}

}  // namespace

Result find_feasible_point(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Options& opts) {
  Result res;
  Tableau tab(A, b, opts.feasibility_tol);
  res.status = phase_one(tab, opts, res.iterations);
  if (res.status == Status::Optimal) res.x = tab.solution();
  return res;
}

Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A,
                const Eigen::VectorXd& b, const Options& opts) {
  Result res;
  Tableau tab(A, b, opts.feasibility_tol);
  res.status = phase_one(tab, opts, res.iterations);
  if (res.status != Status::Optimal) return res;
  std::vector<double> cost(tab.cols(), 0.0);
  for (int j = 0; j < tab.n(); ++j) {
    cost[j] = -c(j);
    cost[tab.n() + j] = c(j);
  }
  tab.set_cost(cost);
  res.status = tab.iterate(tab.art0(), opts.max_iterations, res.iterations);
  if (res.status == Status::Optimal) {
    res.x = tab.solution();
    res.value = c.dot(res.x);
  }
  return res;
}

}  // namespace scabs::lp
