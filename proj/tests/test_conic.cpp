#include "support.hpp"

#include "opfgrad/conic.hpp"
#include "opfgrad/errors.hpp"
#include "opfgrad/jacobian.hpp"

#include <doctest.h>

using namespace opfgrad;
using namespace testing;

namespace {

Eigen::VectorXd golden_load() {
  Eigen::VectorXd load = case9().base_load;
  load[0] = 1.0;
  load[3] = 1.0;
  return load;
}

StandardLP golden_lp() {
  const OpfContext ctx = case9_context();
  return assemble_lp(ctx.net, ctx.cost, ctx.limits, golden_load());
}

}  // namespace

TEST_CASE("conic dimensions for case 9") {
  const ConicProblem p = to_conic(golden_lp());
  CHECK(p.m() == 34);
  CHECK(p.n() == 12);
  REQUIRE(p.cones.size() == 2u);
  CHECK(p.cones[0].kind == ConeKind::Zero);
  CHECK(p.cones[0].dim == 10);
  CHECK(p.cones[1].kind == ConeKind::NonNeg);
  CHECK(p.cones[1].dim == 24);
  const Eigen::MatrixXd q = assemble_Q(p);
  CHECK(q.rows() == 47);
  CHECK(q.cols() == 47);
  CHECK(max_abs(q + q.transpose()) == 0.0);
}

TEST_CASE("Q of a one by one problem") {
  ConicProblem p;
  p.A = Eigen::MatrixXd::Constant(1, 1, 2.0);
  p.b = Eigen::VectorXd::Constant(1, 3.0);
  p.c = Eigen::VectorXd::Constant(1, 5.0);
  p.cones = {{ConeKind::NonNeg, 1}};
  Eigen::Matrix3d want;
  want << 0, 2, 5, -2, 0, 3, -5, -3, 0;
  CHECK(assemble_Q(p) == Eigen::MatrixXd(want));
}

TEST_CASE("Q is skew symmetric for random problems") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    ConicProblem p;
    const int m = 2 + t, n = 1 + t / 2;
    p.A = Eigen::MatrixXd::Random(m, n);
    p.b = uniform_vec(rng, m, -1, 1);
    p.c = uniform_vec(rng, n, -1, 1);
    p.cones = {{ConeKind::Zero, 1}, {ConeKind::NonNeg, m - 1}};
    const Eigen::MatrixXd q = assemble_Q(p);
    CHECK(max_abs(q + q.transpose()) == 0.0);
  }
}

TEST_CASE("embedding of the golden solution") {
  const StandardLP lp = golden_lp();
  const ConicProblem p = to_conic(lp);
  const DispatchSolution sol = solve_lp(lp);
  const SelfDualPoint pt = embed_from_dispatch(p, sol);
  CHECK(pt.residual <= 1e-8);
  CHECK(pt.z3() == 1.0);
  const Eigen::VectorXd u = project_C(pt.z, pt.n, p.cones);
  const Eigen::VectorXd v = u - pt.z;
  CHECK(std::abs(u.dot(v)) <= 1e-9);
  CHECK(max_abs(assemble_Q(p) * u - v) <= 1e-8);
  // Strong duality: c^T x = -b^T y.
  Eigen::VectorXd y(p.m());
  y << sol.tau, sol.inequality_duals();
  CHECK(std::abs(p.c.dot(sol.x()) + p.b.dot(y)) <= 1e-9);

  Eigen::VectorXd bad = sol.x();
  bad[0] += 0.5;
  const Eigen::VectorXd s = p.b - p.A * bad;
  CHECK_THROWS_AS(embed_from_solution(p, bad, y, s), NotOptimal);
}

TEST_CASE("projection derivative values") {
  const std::vector<Cone> cones{{ConeKind::Zero, 1}, {ConeKind::NonNeg, 3}};
  Eigen::VectorXd z(6);
  z << 4.0, -7.0, 2.0, -1.0, 0.0, 3.0;
  const ProjectionDerivative d = cone_projection_derivative(z, 1, cones);
  CHECK(d.diag[0] == 1.0);
  CHECK(d.diag[1] == 1.0);
  CHECK(d.diag[2] == 1.0);
  CHECK(d.diag[3] == 0.0);
  CHECK(d.diag[4] == 0.5);
  CHECK(d.diag[5] == 1.0);
  CHECK(d.nondifferentiable);
  z[4] = 0.25;
  CHECK_FALSE(cone_projection_derivative(z, 1, cones).nondifferentiable);
}

TEST_CASE("projections are idempotent and split z") {
  const std::vector<Cone> cones{{ConeKind::Zero, 3}, {ConeKind::NonNeg, 5}};
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10000; ++t) {
    const Eigen::VectorXd z = uniform_vec(rng, 11, -5, 5);
    const Eigen::VectorXd pc = project_C(z, 2, cones);
    const Eigen::VectorXd pp = project_polar_C(z, 2, cones);
    CHECK(max_abs(project_C(pc, 2, cones) - pc) == 0.0);
    CHECK(max_abs(pc + pp - z) <= 1e-12);
    CHECK(std::abs(pc.dot(pp)) <= 1e-12);
  }
}

TEST_CASE("zero perturbation gives a zero derivative") {
  const StandardLP lp = golden_lp();
  const ConicProblem p = to_conic(lp);
  const SelfDualPoint pt = embed_from_dispatch(p, solve_lp(lp));
  const ConicDerivative d = solution_map_derivative(p, pt, PerturbationTriple::zeros(p.m(), p.n()));
  CHECK(d.dx.isZero(0.0));
  CHECK(d.dy.isZero(0.0));
  CHECK(d.ds.isZero(0.0));
  CHECK_FALSE(d.nondifferentiable);
}

TEST_CASE("load perturbation reproduces the closed form jacobian") {
  const OpfContext ctx = case9_context();
  const JacobianMatrix cf = closed_form_jacobian(ctx.net, {0}, {2});
  const StandardLP lp = golden_lp();
  const ConicProblem p = to_conic(lp);
  const SolutionMapDerivative dm(p, embed_from_dispatch(p, solve_lp(lp)));
  // DP_C(z) z = P_C(z) for these cones, so M z = 0 at a solution and the
  // solve always takes the least-squares branch.
  CHECK(dm.least_squares());
  CHECK(dm.condition() > kLeastSquaresCondition);
  for (int j = 0; j < 6; ++j) {
    PerturbationTriple pert = PerturbationTriple::zeros(p.m(), p.n());
    pert.db[1 + 3 + j] = -1.0;
    const ConicDerivative d = dm.derivative(pert);
    CHECK(max_abs(d.dx.head(3) - cf.J.col(j)) <= 1e-9);
  }
  // A cost change leaves the vertex where it is.
  PerturbationTriple dc = PerturbationTriple::zeros(p.m(), p.n());
  dc.dc[1] = 1e-3;
  CHECK(max_abs(dm.derivative(dc).dx.head(3)) <= 1e-9);
  CHECK(max_abs(conic_jacobian(ctx, golden_load()).J - cf.J) <= 1e-9);
  CHECK(conic_jacobian(ctx, golden_load()).provenance == Provenance::Conic);
}

TEST_CASE("opf derivative conserves load and is linear") {
  const OpfContext ctx = case9_context();
  const JacobianMatrix cf = closed_form_jacobian(ctx.net, {0}, {2});
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd a = uniform_vec(rng, 6, -1, 1), b = uniform_vec(rng, 6, -1, 1);
    const Eigen::VectorXd da = opf_derivative_via_conic(ctx, golden_load(), a);
    const Eigen::VectorXd db = opf_derivative_via_conic(ctx, golden_load(), b);
    CHECK(std::abs(da.sum() - a.sum()) <= 1e-9);
    CHECK(max_abs(da - cf.J * a) <= 1e-9);
    const Eigen::VectorXd dab = opf_derivative_via_conic(ctx, golden_load(), 2.0 * a - 3.0 * b);
    CHECK(max_abs(dab - (2.0 * da - 3.0 * db)) <= 1e-9);
  }
  Eigen::VectorXd out = golden_load();
  out[0] = 9.0;
  out[3] = 9.0;
  CHECK_THROWS_AS(opf_derivative_via_conic(ctx, out, Eigen::VectorXd::Ones(6)), Infeasible);
}
