#include "opfgrad/opf_operator.hpp"

#include "opfgrad/errors.hpp"
#include "opfgrad/jacobian.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace opfgrad {

OperatorValue evaluate(const OpfContext& ctx, const Eigen::VectorXd& load,
                       const EvaluateOptions& opts) {
  validate_load(load, ctx.net.n_load());
  const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, load);
  DispatchSolution sol = solve_lp(lp);
  if (!sol.optimal())
    throw Infeasible(std::string("OPF has no optimum: ") + to_string(sol.status));
  if (uniqueness_probe(lp, sol, opts.uniqueness) != Uniqueness::Unique)
    throw MultipleOptima("OPF optimum is not unique; perturb the cost");
  OperatorValue out;
  out.sg = sol.sg;
  out.binding = detect_binding(sol, lp, ctx.limits, opts.binding_tol, opts.rank_tol);
  out.solution = std::move(sol);
  return out;
}

RegularityReport regularity_report(const DispatchSolution& sol, const StandardLP& lp,
                                   const CapacityLimits& limits, const RegularityOptions& opts) {
  RegularityReport r;
  r.binding = detect_binding(sol, lp, limits, opts.binding_tol, opts.rank_tol);
  r.binding_count = r.binding.count();
  r.expected = lp.n_gen - 1;
  r.rank_ok = r.binding.rank_certificate == lp.n_eq() + r.binding_count;
  r.strict_complementarity_ok = true;
  for (const auto& g : r.binding.gens) {
    const double m = g.side == Side::Upper ? sol.lambda_plus[g.index] : sol.lambda_minus[g.index];
    if (!(m > opts.multiplier_tol)) r.strict_complementarity_ok = false;
  }
  for (const auto& b : r.binding.branches) {
    const double m = b.side == Side::Upper ? sol.mu_plus[b.index] : sol.mu_minus[b.index];
    if (!(m > opts.multiplier_tol)) r.strict_complementarity_ok = false;
  }
  return r;
}

RegularityReport regularity_report(const OpfContext& ctx, const Eigen::VectorXd& load,
                                   const RegularityOptions& opts) {
  const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, load);
  const DispatchSolution sol = solve_lp(lp);
  if (!sol.optimal())
    throw Infeasible(std::string("OPF has no optimum: ") + to_string(sol.status));
  return regularity_report(sol, lp, ctx.limits, opts);
}

namespace {

// theta = X inj with theta_1 = 0 for any balanced injection vector.
Eigen::MatrixXd angle_map(const PowerNetwork& net) {
  const int nb = net.n_bus();
  const Eigen::MatrixXd lap = laplacian(net);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(nb, nb);
  if (nb > 1)
    x.bottomRightCorner(nb - 1, nb - 1) =
        lap.bottomRightCorner(nb - 1, nb - 1).ldlt().solve(
            Eigen::MatrixXd::Identity(nb - 1, nb - 1));
  return x;
}

}  // namespace

ConstructedInstance construct_parameters_for_binding(const PowerNetwork& net,
                                                     const std::vector<int>& s_gen,
                                                     const std::vector<int>& s_branch,
                                                     std::uint64_t seed) {
  const int ng = net.n_gen(), nl = net.n_load(), ne = net.n_edge();
  if (!is_independent(net, s_gen, s_branch))
    throw DependentSets("binding combo is dependent: " +
                        BindingCombo{s_gen, s_branch, false}.label());

  ConstructedInstance out;
  out.sg = Eigen::VectorXd::Ones(ng);
  for (int g : s_gen) out.sg[g] = 0.0;
  const double per_load = static_cast<double>(ng - static_cast<int>(s_gen.size())) / nl;
  out.load = Eigen::VectorXd::Constant(nl, per_load);

  const Eigen::MatrixXd xmap = angle_map(net);
  const Eigen::MatrixXd ptdf = flow_matrix(net) * xmap;
  Eigen::VectorXd inj(net.n_bus());
  inj << out.sg, -out.load;
  const Eigen::VectorXd flows = ptdf * inj;

  const double wide = (ne ? flows.lpNorm<Eigen::Infinity>() : 0.0) + 1.0;
  out.limits.sg_min = Eigen::VectorXd::Zero(ng);
  out.limits.sg_max = Eigen::VectorXd::Constant(ng, 2.0);
  out.limits.p_max = Eigen::VectorXd::Constant(ne, wide);
  out.limits.p_min = Eigen::VectorXd::Constant(ne, -wide);

  // Outward normals (in s^g space) of the constraints active at the target.
  std::vector<Eigen::VectorXd> normals;
  for (int g : s_gen) {
    out.target.gens.push_back({g, Side::Lower});
    normals.push_back(-Eigen::VectorXd::Unit(ng, g));
  }
  for (int e : s_branch) {
    const Eigen::VectorXd grad = ptdf.row(e).head(ng).transpose();
    if (flows[e] >= 0.0) {
      out.limits.p_max[e] = flows[e];
      out.target.branches.push_back({e, Side::Upper});
      normals.push_back(grad);
    } else {
      out.limits.p_min[e] = flows[e];
      out.target.branches.push_back({e, Side::Lower});
      normals.push_back(-grad);
    }
  }
  const std::string want = out.target.canonical();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  constexpr int kAttempts = 20;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    Eigen::VectorXd fprime = Eigen::VectorXd::Zero(ng);
    for (const auto& n : normals) fprime -= (attempt == 0 ? 1.0 : unit(rng)) * n;
    const double shift = fprime.lpNorm<Eigen::Infinity>();
    out.cost = fprime + Eigen::VectorXd::Constant(ng, shift > 0.0 ? shift : 1.0);
    out.attempts = attempt + 1;

    const StandardLP lp = assemble_lp(net, out.cost, out.limits, out.load);
    const DispatchSolution sol = solve_lp(lp);
    if (!sol.optimal()) continue;
    if (detect_binding(sol, lp, out.limits).canonical() != want) continue;
    if (uniqueness_probe(lp, sol) != Uniqueness::Unique) continue;
    return out;
  }
  throw ConstructionFailed("no supporting cost realizes " + want);
}

Eigen::VectorXd perturb_cost(const Eigen::VectorXd& cost, double magnitude, std::uint64_t seed) {
  if (!(magnitude >= 0.0)) throw InvalidInput("perturbation magnitude must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd out = cost;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] = std::max(0.0, out[i] + magnitude * unit(rng));
  return out;
}

CapacityLimits perturb_limits(const CapacityLimits& limits, double magnitude,
                              std::uint64_t seed) {
  if (!(magnitude >= 0.0)) throw InvalidInput("perturbation magnitude must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  CapacityLimits out = limits;
  for (Eigen::Index i = 0; i < out.sg_max.size(); ++i) {
    const double hi = limits.sg_max[i] + magnitude * sym(rng);
    const double lo = std::max(0.0, limits.sg_min[i] + magnitude * sym(rng));
    if (hi > lo) {
      out.sg_max[i] = hi;
      out.sg_min[i] = lo;
    }
  }
  for (Eigen::Index e = 0; e < out.p_max.size(); ++e) {
    const double hi = limits.p_max[e] + magnitude * sym(rng);
    const double lo = limits.p_min[e] + magnitude * sym(rng);
    if (hi > lo) {
      out.p_max[e] = hi;
      out.p_min[e] = lo;
    }
  }
  return out;
}

}  // namespace opfgrad
