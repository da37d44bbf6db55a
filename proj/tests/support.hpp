#pragma once

#include "opfgrad/case.hpp"
#include "opfgrad/dcopf.hpp"
#include "opfgrad/network.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace testing {

using opfgrad::CapacityLimits;
using opfgrad::Edge;
using opfgrad::OpfContext;
using opfgrad::PowerNetwork;

inline std::string case9_path() { return std::string(OPFGRAD_DATA_DIR) + "/case9.json"; }

inline opfgrad::CaseFile case9() { return opfgrad::load_case(case9_path()); }

/// Case 9 with branch (2,8) limits replaced.
inline OpfContext case9_context(double p_min = -2.5490, double p_max = 2.5695) {
  OpfContext ctx = OpfContext::from_case(case9());
  ctx.limits.p_min[8] = p_min;
  ctx.limits.p_max[8] = p_max;
  return ctx;
}

inline CapacityLimits wide_limits(int ng, int ne, double sg_max = 10.0, double p = 100.0) {
  return {Eigen::VectorXd::Constant(ng, sg_max), Eigen::VectorXd::Zero(ng),
          Eigen::VectorXd::Constant(ne, p), Eigen::VectorXd::Constant(ne, -p)};
}

/// 1 generator, 1 load, one edge.
inline PowerNetwork two_bus(double b = 1.0) { return PowerNetwork(1, 1, {{1, 2, b}}); }

/// Generators on buses 1 and 2, loads on 3 and 4, a four-edge ring plus a chord.
inline PowerNetwork four_bus() {
  return PowerNetwork(2, 2, {{1, 3, 4.0}, {3, 4, 2.5}, {2, 4, 5.0}, {1, 2, 1.5}, {1, 4, 3.0}});
}

/// Three generators and two loads; branch 5 is (4,5).
inline PowerNetwork five_bus() {
  return PowerNetwork(3, 2, {{1, 4, 5.0}, {2, 4, 4.0}, {3, 5, 6.0}, {2, 5, 3.0}, {4, 5, 2.0}});
}

/// Connected random network: a random spanning tree plus extra edges.
inline PowerNetwork random_network(std::mt19937_64& rng, int ng, int nl, int extra) {
  const int nb = ng + nl;
  std::uniform_real_distribution<double> b(0.5, 20.0);
  std::vector<Edge> edges;
  std::vector<int> order(nb);
  for (int i = 0; i < nb; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  for (int k = 1; k < nb; ++k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    edges.push_back({order[pick(rng)], order[k], b(rng)});
  }
  std::uniform_int_distribution<int> any(1, nb);
  for (int k = 0; k < extra; ++k) {
    const int u = any(rng), v = any(rng);
    if (u != v) edges.push_back({u, v, b(rng)});
  }
  return PowerNetwork(ng, nl, edges);
}

inline Eigen::VectorXd uniform_vec(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

/// Canonical binding set at a load, or "infeasible".
inline std::string region_at(const OpfContext& ctx, const Eigen::VectorXd& load) {
  const opfgrad::StandardLP lp = opfgrad::assemble_lp(ctx.net, ctx.cost, ctx.limits, load);
  const opfgrad::DispatchSolution sol = opfgrad::solve_lp(lp);
  if (!sol.optimal()) return "infeasible";
  return opfgrad::detect_binding(sol, lp, ctx.limits).canonical();
}

/// Bisects the segment [a, b] (different regions at the ends) down to a
/// bracket of width `width`; returns its midpoint.
inline Eigen::VectorXd boundary_between(const OpfContext& ctx, Eigen::VectorXd a, Eigen::VectorXd b,
                                        double width = 1e-12) {
  const std::string ra = region_at(ctx, a);
  while ((b - a).norm() > width) {
    const Eigen::VectorXd mid = 0.5 * (a + b);
    if (region_at(ctx, mid) == ra) a = mid;
    else b = mid;
  }
  return 0.5 * (a + b);
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace testing
