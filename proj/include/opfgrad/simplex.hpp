#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

namespace opfgrad {

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

const char* to_string(LpStatus s);

/// min c^T x  s.t.  A x = b,  lower <= x <= upper  (bounds may be infinite).
struct BoundedLP {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct SimplexOptions {
  double pivot_tol = 1e-9;
  double optimality_tol = 1e-9;
  double feasibility_tol = 1e-9;
  /// Consecutive degenerate pivots after which Bland's rule takes over.
  int bland_after = 50;
  int max_iterations = 20000;
  int refactor_every = 64;
};

struct SimplexResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  /// Row duals y = B^{-T} c_B, so reduced costs are c - A^T y.
  Eigen::VectorXd y;
  Eigen::VectorXd reduced_costs;
  /// basis[i] is the column basic in row i; entries >= A.cols() denote
  /// artificials left in the basis on redundant rows.
  std::vector<int> basis;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense bounded-variable primal simplex with a two-phase start. Pricing is
/// Dantzig's rule until `bland_after` consecutive degenerate pivots, then
/// Bland's rule until the next nondegenerate step, so identical inputs always
/// follow the same pivot sequence.
SimplexResult solve_bounded_lp(const BoundedLP& lp, const SimplexOptions& opts = {});

}  // namespace opfgrad
