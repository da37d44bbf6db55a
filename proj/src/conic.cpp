#include "opfgrad/conic.hpp"

#include "opfgrad/errors.hpp"

#include <algorithm>
#include <cmath>

namespace opfgrad {

ConicProblem to_conic(const StandardLP& lp) {
  ConicProblem p;
  p.A.resize(lp.n_eq() + lp.n_in(), lp.n_vars());
  p.A << lp.A_eq, lp.A_in;
  p.b.resize(lp.n_eq() + lp.n_in());
  p.b << lp.b_eq, lp.b_in;
  p.c = lp.c;
  p.cones = {{ConeKind::Zero, lp.n_eq()}, {ConeKind::NonNeg, lp.n_in()}};
  return p;
}

Eigen::MatrixXd assemble_Q(const ConicProblem& p) {
  const int n = p.n(), m = p.m();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
  q.block(0, n, n, m) = p.A.transpose();
  q.block(0, n + m, n, 1) = p.c;
  q.block(n, 0, m, n) = -p.A;
  q.block(n, n + m, m, 1) = p.b;
  q.block(n + m, 0, 1, n) = -p.c.transpose();
  q.block(n + m, n, 1, m) = -p.b.transpose();
  return q;
}

namespace {

void check_cones(const std::vector<Cone>& cones, Eigen::Index m) {
  Eigen::Index total = 0;
  for (const auto& c : cones) {
    if (c.dim <= 0) throw InvalidInput("cone dimensions must be positive");
    total += c.dim;
  }
  if (total != m) throw InvalidInput("cone dimensions do not sum to the row count");
}

}  // namespace

Eigen::VectorXd cone_projection(const Eigen::VectorXd& z2, const std::vector<Cone>& cones) {
  check_cones(cones, z2.size());
  Eigen::VectorXd out = z2;
  int off = 0;
  for (const auto& c : cones) {
    if (c.kind == ConeKind::NonNeg) out.segment(off, c.dim) = z2.segment(off, c.dim).cwiseMax(0.0);
    off += c.dim;
  }
  return out;
}

Eigen::VectorXd project_C(const Eigen::VectorXd& z, int n, const std::vector<Cone>& cones) {
  const Eigen::Index m = z.size() - n - 1;
  Eigen::VectorXd out(z.size());
  out.head(n) = z.head(n);
  out.segment(n, m) = cone_projection(z.segment(n, m), cones);
  out[n + m] = std::max(0.0, z[n + m]);
  return out;
}

Eigen::VectorXd project_polar_C(const Eigen::VectorXd& z, int n, const std::vector<Cone>& cones) {
  const Eigen::Index m = z.size() - n - 1;
  check_cones(cones, m);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(z.size());
  int off = n;
  for (const auto& c : cones) {
    if (c.kind == ConeKind::NonNeg) out.segment(off, c.dim) = z.segment(off, c.dim).cwiseMin(0.0);
    off += c.dim;
  }
  out[n + m] = std::min(0.0, z[n + m]);
  return out;
}

ProjectionDerivative cone_projection_derivative(const Eigen::VectorXd& z, int n,
                                                const std::vector<Cone>& cones,
                                                double deriv_tol) {
  const Eigen::Index m = z.size() - n - 1;
  check_cones(cones, m);
  ProjectionDerivative d;
  d.diag = Eigen::VectorXd::Ones(z.size());
  auto nonneg = [&](Eigen::Index k) {
    if (std::abs(z[k]) <= deriv_tol) {
      d.diag[k] = 0.5;
      d.nondifferentiable = true;
    } else {
      d.diag[k] = z[k] > 0.0 ? 1.0 : 0.0;
    }
  };
  Eigen::Index off = n;
  for (const auto& c : cones) {
    if (c.kind == ConeKind::NonNeg)
      for (int k = 0; k < c.dim; ++k) nonneg(off + k);
    off += c.dim;
  }
  nonneg(n + m);
  return d;
}

SelfDualPoint embed_from_solution(const ConicProblem& p, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& y, const Eigen::VectorXd& s,
                                  double tol) {
  const int n = p.n(), m = p.m();
  if (x.size() != n || y.size() != m || s.size() != m)
    throw InvalidInput("embedding: (x, y, s) sizes do not match the problem");
  SelfDualPoint pt;
  pt.n = n;
  pt.m = m;
  pt.z.resize(n + m + 1);
  pt.z << x, y - s, 1.0;
  const Eigen::VectorXd u = project_C(pt.z, n, p.cones);
  const Eigen::VectorXd v = u - pt.z;
  pt.residual = (assemble_Q(p) * u - v).lpNorm<Eigen::Infinity>();
  if (!(pt.residual <= tol))
    throw NotOptimal("embedding residual " + std::to_string(pt.residual) + " exceeds tolerance");
  return pt;
}

SelfDualPoint embed_from_dispatch(const ConicProblem& p, const DispatchSolution& sol, double tol) {
  if (!sol.optimal()) throw NotOptimal("dispatch is not optimal");
  const Eigen::VectorXd x = sol.x();
  Eigen::VectorXd y(p.m());
  y << sol.tau, sol.inequality_duals();
  // Clean sign noise so that y and s sit exactly in their cones.
  Eigen::VectorXd s = p.b - p.A * x;
  int off = 0;
  for (const auto& c : p.cones) {
    if (c.kind == ConeKind::Zero) {
      s.segment(off, c.dim).setZero();
    } else {
      s.segment(off, c.dim) = s.segment(off, c.dim).cwiseMax(0.0);
      y.segment(off, c.dim) = y.segment(off, c.dim).cwiseMax(0.0);
    }
    off += c.dim;
  }
  return embed_from_solution(p, x, y, s, tol);
}

PerturbationTriple PerturbationTriple::zeros(int m, int n) {
  return {Eigen::MatrixXd::Zero(m, n), Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(n)};
}

SolutionMapDerivative::SolutionMapDerivative(const ConicProblem& p, const SelfDualPoint& point,
                                             double deriv_tol)
    : problem_(p), point_(point) {
  const int n = p.n(), m = p.m(), dim = n + m + 1;
  const double z3 = point.z3();
  if (!(z3 > 0.0)) throw InvalidInput("embedded point needs z3 > 0");
  u_ = project_C(point.z / z3, n, p.cones);
  const ProjectionDerivative d = cone_projection_derivative(point.z, n, p.cones, deriv_tol);
  dp_ = d.diag;
  nondifferentiable_ = d.nondifferentiable;

  const Eigen::MatrixXd q = assemble_Q(p);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd mmat = ((q - eye) * dp_.asDiagonal() + eye) / z3;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(mmat);
  const auto& sv = svd.singularValues();
  condition_ = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                       : std::numeric_limits<double>::infinity();
  least_squares_ = !(condition_ <= kLeastSquaresCondition);
  if (least_squares_) {
    cod_.compute(mmat);
  } else {
    lu_.compute(mmat);
  }
}

ConicDerivative SolutionMapDerivative::derivative(const PerturbationTriple& pert) const {
  const int n = problem_.n(), m = problem_.m();
  if (pert.dA.rows() != m || pert.dA.cols() != n || pert.db.size() != m || pert.dc.size() != n)
    throw InvalidInput("perturbation sizes do not match the problem");

  // g = dQ u, with dQ built block by block.
  Eigen::VectorXd g(n + m + 1);
  const auto ux = u_.head(n);
  const auto uy = u_.segment(n, m);
  const double ut = u_[n + m];
  g.head(n) = pert.dA.transpose() * uy + pert.dc * ut;
  g.segment(n, m) = -pert.dA * ux + pert.db * ut;
  g[n + m] = -pert.dc.dot(ux) - pert.db.dot(uy);

  const Eigen::VectorXd dz = least_squares_ ? Eigen::VectorXd(cod_.solve(-g))
                                            : Eigen::VectorXd(lu_.solve(-g));
  const double dz3 = dz[n + m];
  const Eigen::VectorXd dz2 = dz.segment(n, m);
  const Eigen::VectorXd dpz2 = dp_.segment(n, m).cwiseProduct(dz2);

  const Eigen::VectorXd x = point_.z1();
  const Eigen::VectorXd y = cone_projection(point_.z2(), problem_.cones);
  const Eigen::VectorXd s = y - point_.z2();

  ConicDerivative out;
  out.dx = dz.head(n) - dz3 * x;
  out.dy = dpz2 - dz3 * y;
  out.ds = dpz2 - dz2 - dz3 * s;
  out.nondifferentiable = nondifferentiable_;
  out.least_squares = least_squares_;
  out.condition = condition_;
  return out;
}

ConicDerivative solution_map_derivative(const ConicProblem& p, const SelfDualPoint& point,
                                        const PerturbationTriple& pert) {
  return SolutionMapDerivative(p, point).derivative(pert);
}

namespace {

struct OpfConic {
  StandardLP lp;
  ConicProblem problem;
  SelfDualPoint point;
};

OpfConic prepare(const OpfContext& ctx, const Eigen::VectorXd& load) {
  OpfConic oc;
  oc.lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, load);
  const DispatchSolution sol = solve_lp(oc.lp);
  if (!sol.optimal()) throw Infeasible(std::string("OPF has no optimum: ") + to_string(sol.status));
  oc.problem = to_conic(oc.lp);
  oc.point = embed_from_dispatch(oc.problem, sol);
  return oc;
}

// Load-balance rows of b_eq come after the slack row and the generator rows.
int load_row(const StandardLP& lp, int j) { return 1 + lp.n_gen + j; }

}  // namespace

Eigen::VectorXd opf_derivative_via_conic(const OpfContext& ctx, const Eigen::VectorXd& load,
                                         const Eigen::VectorXd& dload) {
  if (dload.size() != ctx.net.n_load()) throw InvalidInput("dload has the wrong length");
  const OpfConic oc = prepare(ctx, load);
  PerturbationTriple pert = PerturbationTriple::zeros(oc.problem.m(), oc.problem.n());
  for (int j = 0; j < dload.size(); ++j) pert.db[load_row(oc.lp, j)] = -dload[j];
  return solution_map_derivative(oc.problem, oc.point, pert).dx.head(ctx.net.n_gen());
}

JacobianMatrix conic_jacobian(const OpfContext& ctx, const Eigen::VectorXd& load) {
  const OpfConic oc = prepare(ctx, load);
  const SolutionMapDerivative deriv(oc.problem, oc.point);
  const int ng = ctx.net.n_gen(), nl = ctx.net.n_load();
  JacobianMatrix out;
  out.provenance = Provenance::Conic;
  out.J.resize(ng, nl);
  for (int j = 0; j < nl; ++j) {
    PerturbationTriple pert = PerturbationTriple::zeros(oc.problem.m(), oc.problem.n());
    pert.db[load_row(oc.lp, j)] = -1.0;
    out.J.col(j) = deriv.derivative(pert).dx.head(ng);
  }
  return out;
}

}  // namespace opfgrad
