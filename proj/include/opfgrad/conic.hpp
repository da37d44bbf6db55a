#pragma once

#include "opfgrad/dcopf.hpp"
#include "opfgrad/jacobian.hpp"

#include <Eigen/Dense>

#include <vector>

namespace opfgrad {

enum class ConeKind { Zero, NonNeg };

struct Cone {
  ConeKind kind = ConeKind::Zero;
  int dim = 0;
};

/// min c^T x  s.t.  A x + s = b,  s in K;  dual  max -b^T y  s.t.  A^T y + c = 0,  y in K*.
struct ConicProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  std::vector<Cone> cones;

  int m() const { return static_cast<int>(A.rows()); }
  int n() const { return static_cast<int>(A.cols()); }
};

/// Stacks A_eq over A_in with cones [(Zero, N+1), (NonNeg, 2N_G+2E)].
ConicProblem to_conic(const StandardLP& lp);

/// [[0, A^T, c], [-A, 0, b], [-c^T, -b^T, 0]].
Eigen::MatrixXd assemble_Q(const ConicProblem& p);

/// Embedded point z = (x, y - s, 1) with u = P_C z and v = u - z.
struct SelfDualPoint {
  Eigen::VectorXd z;
  int n = 0;
  int m = 0;
  /// max |Q u - v| at construction.
  double residual = 0.0;

  Eigen::VectorXd z1() const { return z.head(n); }
  Eigen::VectorXd z2() const { return z.segment(n, m); }
  double z3() const { return z[n + m]; }
};

inline constexpr double kDefaultEmbedTol = 1e-8;

/// Throws NotOptimal when the embedding residual exceeds `tol`.
SelfDualPoint embed_from_solution(const ConicProblem& p, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                  double tol = kDefaultEmbedTol);

/// Uses x = [s^g; theta], y = [tau; omega], s = b - A x.
SelfDualPoint embed_from_dispatch(const ConicProblem& p, const DispatchSolution& sol,
                                  double tol = kDefaultEmbedTol);

/// Projection of a z2 block onto K*: identity on Zero-cone slots (their dual
/// cone is free), max(0, .) on NonNeg slots.
Eigen::VectorXd cone_projection(const Eigen::VectorXd& z2, const std::vector<Cone>& cones);

/// Projection onto C = R^n x K* x R_+.
Eigen::VectorXd project_C(const Eigen::VectorXd& z, int n, const std::vector<Cone>& cones);

/// Projection onto the polar cone -C* = {0}^n x (-K) x R_-.
Eigen::VectorXd project_polar_C(const Eigen::VectorXd& z, int n, const std::vector<Cone>& cones);

inline constexpr double kDefaultDerivTol = 1e-12;

/// Diagonal of DP_C(z). NonNeg slots use (sign + 1) / 2, and 0.5 on
/// |z_k| <= deriv_tol where `nondifferentiable` is raised.
struct ProjectionDerivative {
  Eigen::VectorXd diag;
  bool nondifferentiable = false;
};

ProjectionDerivative cone_projection_derivative(const Eigen::VectorXd& z, int n,
                                                const std::vector<Cone>& cones,
                                                double deriv_tol = kDefaultDerivTol);

struct PerturbationTriple {
  Eigen::MatrixXd dA;
  Eigen::VectorXd db;
  Eigen::VectorXd dc;

  static PerturbationTriple zeros(int m, int n);
};

struct ConicDerivative {
  Eigen::VectorXd dx;
  Eigen::VectorXd dy;
  Eigen::VectorXd ds;
  bool nondifferentiable = false;
  bool least_squares = false;
  double condition = 0.0;
};

inline constexpr double kLeastSquaresCondition = 1e12;

/// Factors M = ((Q - I) DP_C(z) + I) / z3 once; `derivative` then solves
/// M dz = -dQ P_C(z / z3) per perturbation.
class SolutionMapDerivative {
 public:
  SolutionMapDerivative(const ConicProblem& p, const SelfDualPoint& point,
                        double deriv_tol = kDefaultDerivTol);

  ConicDerivative derivative(const PerturbationTriple& pert) const;

  double condition() const { return condition_; }
  bool least_squares() const { return least_squares_; }
  bool nondifferentiable() const { return nondifferentiable_; }

 private:
  ConicProblem problem_;
  SelfDualPoint point_;
  Eigen::VectorXd u_;
  Eigen::VectorXd dp_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
  double condition_ = 0.0;
  bool least_squares_ = false;
  bool nondifferentiable_ = false;
};

ConicDerivative solution_map_derivative(const ConicProblem& p, const SelfDualPoint& point,
                                        const PerturbationTriple& pert);

/// d s^g for a load direction `dload`: db = -dload on the load balance rows.
/// Throws Infeasible when the OPF has no optimum.
Eigen::VectorXd opf_derivative_via_conic(const OpfContext& ctx, const Eigen::VectorXd& load,
                                         const Eigen::VectorXd& dload);

/// Every load direction at once from one factorization.
JacobianMatrix conic_jacobian(const OpfContext& ctx, const Eigen::VectorXd& load);

}  // namespace opfgrad
