#include "opfgrad/dcopf.hpp"

#include "opfgrad/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace opfgrad {

namespace {

// [A_eq 0; A_in I] over the columns [x; inequality slacks].
Eigen::MatrixXd slack_form(const StandardLP& lp) {
  const int m = lp.n_eq() + lp.n_in();
  const int n = lp.n_vars() + lp.n_in();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n);
  a.topLeftCorner(lp.n_eq(), lp.n_vars()) = lp.A_eq;
  a.bottomLeftCorner(lp.n_in(), lp.n_vars()) = lp.A_in;
  a.bottomRightCorner(lp.n_in(), lp.n_in()).setIdentity();
  return a;
}

}  // namespace

StandardLP assemble_lp(const PowerNetwork& net, const Eigen::VectorXd& cost,
                       const CapacityLimits& limits, const Eigen::VectorXd& load) {
  const int ng = net.n_gen(), nb = net.n_bus(), ne = net.n_edge(), nl = net.n_load();
  if (cost.size() != ng) throw InvalidInput("cost: expected length " + std::to_string(ng));
  if (load.size() != nl) throw InvalidInput("load: expected length " + std::to_string(nl));
  limits.validate(ng, ne);

  const Eigen::MatrixXd lap = laplacian(net);
  const Eigen::MatrixXd bct = flow_matrix(net);

  StandardLP lp;
  lp.n_gen = ng;
  lp.n_bus = nb;
  lp.n_edge = ne;
  const int nv = ng + nb;

  lp.A_eq = Eigen::MatrixXd::Zero(nb + 1, nv);
  lp.A_eq(0, ng) = 1.0;  // theta_1 = 0
  lp.A_eq.block(1, 0, ng, ng) = -Eigen::MatrixXd::Identity(ng, ng);
  lp.A_eq.block(1, ng, nb, nb) = lap;
  lp.b_eq = Eigen::VectorXd::Zero(nb + 1);
  lp.b_eq.tail(nl) = -load;

  lp.A_in = Eigen::MatrixXd::Zero(2 * ne + 2 * ng, nv);
  lp.A_in.block(0, ng, ne, nb) = bct;
  lp.A_in.block(ne, ng, ne, nb) = -bct;
  lp.A_in.block(2 * ne, 0, ng, ng).setIdentity();
  lp.A_in.block(2 * ne + ng, 0, ng, ng) = -Eigen::MatrixXd::Identity(ng, ng);
  lp.b_in.resize(2 * ne + 2 * ng);
  lp.b_in << limits.p_max, -limits.p_min, limits.sg_max, -limits.sg_min;

  lp.c = Eigen::VectorXd::Zero(nv);
  lp.c.head(ng) = cost;
  return lp;
}

Eigen::VectorXd DispatchSolution::x() const {
  Eigen::VectorXd v(sg.size() + theta.size());
  v << sg, theta;
  return v;
}

Eigen::VectorXd DispatchSolution::inequality_duals() const {
  Eigen::VectorXd w(mu_plus.size() * 2 + lambda_plus.size() * 2);
  w << mu_plus, mu_minus, lambda_plus, lambda_minus;
  return w;
}

DispatchSolution solve_lp(const StandardLP& lp, const SimplexOptions& opts) {
  const int nv = lp.n_vars(), ni = lp.n_in(), ne = lp.n_eq();
  BoundedLP blp;
  blp.A = slack_form(lp);
  blp.b.resize(ne + ni);
  blp.b << lp.b_eq, lp.b_in;
  blp.c = Eigen::VectorXd::Zero(nv + ni);
  blp.c.head(nv) = lp.c;
  const double inf = std::numeric_limits<double>::infinity();
  blp.lower = Eigen::VectorXd::Constant(nv + ni, -inf);
  blp.lower.tail(ni).setZero();
  blp.upper = Eigen::VectorXd::Constant(nv + ni, inf);

  const SimplexResult res = solve_bounded_lp(blp, opts);
  DispatchSolution sol;
  sol.status = res.status;
  if (res.status != LpStatus::Optimal) return sol;

  const Eigen::VectorXd x = res.x.head(nv);
  sol.sg = x.head(lp.n_gen);
  sol.theta = x.tail(lp.n_bus);
  sol.flows = lp.A_in.topRows(lp.n_edge) * x;
  sol.objective = lp.c.dot(x);
  sol.tau = -res.y.head(ne);
  const Eigen::VectorXd omega = -res.y.tail(ni);
  sol.mu_plus = omega.segment(lp.row_flow_upper(), lp.n_edge);
  sol.mu_minus = omega.segment(lp.row_flow_lower(), lp.n_edge);
  sol.lambda_plus = omega.segment(lp.row_gen_upper(), lp.n_gen);
  sol.lambda_minus = omega.segment(lp.row_gen_lower(), lp.n_gen);
  sol.basis = res.basis;
  sol.reduced_costs = res.reduced_costs;
  return sol;
}

DispatchSolution solve_opf(const PowerNetwork& net, const Eigen::VectorXd& cost,
                           const CapacityLimits& limits, const Eigen::VectorXd& load,
                           const SimplexOptions& opts) {
  return solve_lp(assemble_lp(net, cost, limits, load), opts);
}

DispatchSolution solve_opf(const OpfContext& ctx, const Eigen::VectorXd& load,
                           const SimplexOptions& opts) {
  return solve_opf(ctx.net, ctx.cost, ctx.limits, load, opts);
}

double KktResiduals::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

KktResiduals kkt_residuals(const DispatchSolution& sol, const StandardLP& lp) {
  KktResiduals r;
  if (!sol.optimal()) {
    const double inf = std::numeric_limits<double>::infinity();
    return {inf, inf, inf, inf, inf};
  }
  const Eigen::VectorXd x = sol.x();
  const Eigen::VectorXd omega = sol.inequality_duals();
  const Eigen::VectorXd slack = lp.b_in - lp.A_in * x;

  r.stationarity =
      (lp.c + lp.A_eq.transpose() * sol.tau + lp.A_in.transpose() * omega).lpNorm<Eigen::Infinity>();
  r.primal = std::max((lp.A_eq * x - lp.b_eq).lpNorm<Eigen::Infinity>(),
                      std::max(0.0, -slack.minCoeff()));
  r.dual = std::max(0.0, -omega.minCoeff());
  r.complementarity = omega.cwiseProduct(slack).lpNorm<Eigen::Infinity>();
  const double dual_objective = -lp.b_eq.dot(sol.tau) - lp.b_in.dot(omega);
  r.duality_gap = std::abs(lp.c.dot(x) - dual_objective);
  return r;
}

const char* to_string(Side s) { return s == Side::Upper ? "Upper" : "Lower"; }

std::vector<int> BindingSet::gen_indices() const {
  std::vector<int> v;
  for (const auto& g : gens) v.push_back(g.index);
  return v;
}

std::vector<int> BindingSet::branch_indices() const {
  std::vector<int> v;
  for (const auto& b : branches) v.push_back(b.index);
  return v;
}

std::string BindingSet::canonical() const {
  auto part = [](std::vector<BoundIndex> items, char tag) {
    std::sort(items.begin(), items.end());
    std::string s;
    for (const auto& it : items) {
      if (!s.empty()) s += ',';
      s += tag + std::to_string(it.index + 1) + (it.side == Side::Upper ? 'U' : 'L');
    }
    return s;
  };
  return part(gens, 'G') + "|" + part(branches, 'B');
}

std::string BindingSet::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool BindingSet::same_indices(const BindingSet& other) const {
  auto sorted = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  return sorted(gen_indices()) == sorted(other.gen_indices()) &&
         sorted(branch_indices()) == sorted(other.branch_indices());
}

int numeric_rank(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > rel_tol * s[0]) ++r;
  return r;
}

BindingSet detect_binding(const DispatchSolution& sol, const StandardLP& lp,
                          const CapacityLimits& limits, double tol, double rank_tol) {
  if (!sol.optimal()) throw InvalidInput("detect_binding needs an optimal solution");
  BindingSet bs;
  std::vector<int> rows;
  auto classify = [&](double value, double hi, double lo, int index, int row_hi, int row_lo,
                      std::vector<BoundIndex>& out) {
    const double gap_hi = hi - value;
    const double gap_lo = value - lo;
    const bool at_hi = gap_hi <= tol * std::max(1.0, std::abs(hi));
    const bool at_lo = gap_lo <= tol * std::max(1.0, std::abs(lo));
    if (at_hi && at_lo) bs.both_sides_flag = true;
    if (at_hi && (!at_lo || gap_hi <= gap_lo)) {
      out.push_back({index, Side::Upper});
      rows.push_back(row_hi);
    } else if (at_lo) {
      out.push_back({index, Side::Lower});
      rows.push_back(row_lo);
    }
  };
  for (int i = 0; i < lp.n_gen; ++i)
    classify(sol.sg[i], limits.sg_max[i], limits.sg_min[i], i, lp.row_gen_upper() + i,
             lp.row_gen_lower() + i, bs.gens);
  for (int e = 0; e < lp.n_edge; ++e)
    classify(sol.flows[e], limits.p_max[e], limits.p_min[e], e, lp.row_flow_upper() + e,
             lp.row_flow_lower() + e, bs.branches);

  Eigen::MatrixXd stacked(lp.n_eq() + static_cast<int>(rows.size()), lp.n_vars());
  stacked.topRows(lp.n_eq()) = lp.A_eq;
  for (std::size_t k = 0; k < rows.size(); ++k)
    stacked.row(lp.n_eq() + static_cast<int>(k)) = lp.A_in.row(rows[k]);
  bs.rank_certificate = numeric_rank(stacked, rank_tol);
  return bs;
}

const char* to_string(Uniqueness u) {
  return u == Uniqueness::Unique ? "Unique" : "MultipleSuspected";
}

Uniqueness uniqueness_probe(const StandardLP& lp, const DispatchSolution& sol,
                            const UniquenessOptions& opts) {
  if (!sol.optimal()) throw InvalidInput("uniqueness_probe needs an optimal solution");
  const int nv = lp.n_vars(), ng = lp.n_gen;
  const Eigen::MatrixXd a = slack_form(lp);
  const int ncols = static_cast<int>(a.cols());
  const int m = static_cast<int>(a.rows());

  const bool clean_basis =
      static_cast<int>(sol.basis.size()) == m &&
      std::all_of(sol.basis.begin(), sol.basis.end(), [&](int j) { return j < ncols; });
  if (clean_basis) {
    Eigen::MatrixXd bmat(m, m);
    std::vector<bool> is_basic(ncols, false);
    for (int i = 0; i < m; ++i) {
      bmat.col(i) = a.col(sol.basis[i]);
      is_basic[sol.basis[i]] = true;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
    Eigen::VectorXd values(ncols);
    values << sol.x(), lp.b_in - lp.A_in * sol.x();

    for (int j = 0; j < ncols; ++j) {
      if (is_basic[j] || std::abs(sol.reduced_costs[j]) > opts.reduced_cost_tol) continue;
      const Eigen::VectorXd alpha = lu.solve(a.col(j));
      const bool free_column = j < nv;
      for (int dir : {1, -1}) {
        if (dir < 0 && !free_column) break;
        double step = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
          const int b = sol.basis[i];
          const double rate = -dir * alpha[i];
          if (b >= nv && rate < -1e-12) step = std::min(step, std::max(0.0, values[b]) / -rate);
        }
        if (step <= 1e-9) continue;
        // Motion of s^g along the edge, per unit step.
        double move = j < ng ? 1.0 : 0.0;
        for (int i = 0; i < m; ++i)
          if (sol.basis[i] < ng) move = std::max(move, std::abs(alpha[i]));
        if (!std::isfinite(step) || step * move > 1e-9) return Uniqueness::MultipleSuspected;
      }
    }
  }

  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  StandardLP jittered = lp;
  for (int i = 0; i < ng; ++i) jittered.c[i] = std::max(0.0, lp.c[i] + opts.jitter * unit(rng));
  const DispatchSolution other = solve_lp(jittered);
  if (!other.optimal()) return Uniqueness::MultipleSuspected;
  if ((other.sg - sol.sg).lpNorm<Eigen::Infinity>() > opts.change_tol)
    return Uniqueness::MultipleSuspected;
  return Uniqueness::Unique;
}

int multiplier_count(const DispatchSolution& sol, double zero_tol) {
  int count = 0;
  for (const Eigen::VectorXd* v : {&sol.mu_plus, &sol.mu_minus, &sol.lambda_plus, &sol.lambda_minus})
    for (Eigen::Index i = 0; i < v->size(); ++i)
      if ((*v)[i] > zero_tol) ++count;
  return count;
}

}  // namespace opfgrad
