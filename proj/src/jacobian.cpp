#include "opfgrad/jacobian.hpp"

#include "opfgrad/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>

namespace opfgrad {

std::string BindingCombo::label() const {
  std::string s;
  for (std::size_t k = 0; k < gens.size(); ++k)
    s += (k ? ",G" : "G") + std::to_string(gens[k] + 1);
  s += '|';
  for (std::size_t k = 0; k < branches.size(); ++k)
    s += (k ? ",B" : "B") + std::to_string(branches[k] + 1);
  return s;
}

BindingCombo BindingCombo::from(const BindingSet& bs) {
  BindingCombo c;
  c.gens = bs.gen_indices();
  c.branches = bs.branch_indices();
  std::sort(c.gens.begin(), c.gens.end());
  std::sort(c.branches.begin(), c.branches.end());
  return c;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "ClosedForm";
    case Provenance::FiniteDifference: return "FiniteDifference";
    case Provenance::Conic: return "Conic";
  }
  return "Unknown";
}

namespace {

void check_combo(const PowerNetwork& net, const std::vector<int>& s_gen,
                 const std::vector<int>& s_branch) {
  if (static_cast<int>(s_gen.size() + s_branch.size()) != net.n_gen() - 1)
    throw InvalidInput("binding combo must have exactly n_gen - 1 members");
  for (int g : s_gen)
    if (g < 0 || g >= net.n_gen()) throw InvalidInput("generator index out of range");
  for (int e : s_branch)
    if (e < 0 || e >= net.n_edge()) throw InvalidInput("branch index out of range");
}

}  // namespace

Eigen::MatrixXd assemble_H(const PowerNetwork& net, const std::vector<int>& s_gen,
                           const std::vector<int>& s_branch) {
  check_combo(net, s_gen, s_branch);
  const int ng = net.n_gen(), nb = net.n_bus(), nl = net.n_load();
  const Eigen::MatrixXd lap = laplacian(net);
  const Eigen::MatrixXd bct = flow_matrix(net);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nb + ng, nb + ng);
  h.topLeftCorner(ng, ng) = -Eigen::MatrixXd::Identity(ng, ng);
  h.block(0, ng, ng, nb) = lap.topRows(ng);
  h.block(ng, ng, nl, nb) = lap.bottomRows(nl);
  int row = nb;
  for (int g : s_gen) h(row++, g) = 1.0;
  for (int e : s_branch) h.block(row++, ng, 1, nb) = bct.row(e);
  h(row, ng) = 1.0;
  return h;
}

Eigen::MatrixXd assemble_R(const PowerNetwork& net, const std::vector<int>& s_gen,
                           const std::vector<int>& s_branch) {
  check_combo(net, s_gen, s_branch);
  const int nb = net.n_bus(), nl = net.n_load();
  const Eigen::MatrixXd lap = laplacian(net);
  const Eigen::MatrixXd bct = flow_matrix(net);
  Eigen::MatrixXd rt = Eigen::MatrixXd::Zero(nb, nb);
  rt.topRows(nl) = lap.bottomRows(nl);
  int row = nl;
  for (int g : s_gen) rt.row(row++) = lap.row(g);
  for (int e : s_branch) rt.row(row++) = bct.row(e);
  rt(row, 0) = 1.0;
  return rt;
}

bool is_independent(const PowerNetwork& net, const std::vector<int>& s_gen,
                    const std::vector<int>& s_branch, double rank_tol) {
  return numeric_rank(assemble_R(net, s_gen, s_branch), rank_tol) == net.n_bus();
}

JacobianMatrix closed_form_jacobian(const PowerNetwork& net, const std::vector<int>& s_gen,
                                    const std::vector<int>& s_branch, double rank_tol) {
  const Eigen::MatrixXd rt = assemble_R(net, s_gen, s_branch);
  if (numeric_rank(rt, rank_tol) != net.n_bus())
    throw SingularCombo("R is singular for combo " +
                        BindingCombo{s_gen, s_branch, false}.label());
  const int ng = net.n_gen(), nl = net.n_load(), nb = net.n_bus();
  // First N_L columns of (R^T)^{-1}.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, nl);
  rhs.topRows(nl).setIdentity();
  const Eigen::MatrixXd cols = rt.partialPivLu().solve(rhs);
  JacobianMatrix out;
  out.J = -laplacian(net).topRows(ng) * cols;
  out.provenance = Provenance::ClosedForm;
  out.combo = {s_gen, s_branch, true};
  return out;
}

JacobianMatrix fd_jacobian(const OpfContext& ctx, const Eigen::VectorXd& load, double step,
                           double binding_tol) {
  if (!(step > 0.0)) throw InvalidInput("finite-difference step must be positive");
  auto solve_at = [&](const Eigen::VectorXd& l, BindingSet& bs) {
    const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, l);
    const DispatchSolution sol = solve_lp(lp);
    if (!sol.optimal()) throw Infeasible("OPF infeasible at finite-difference probe");
    bs = detect_binding(sol, lp, ctx.limits, binding_tol);
    return sol.sg;
  };
  BindingSet center;
  solve_at(load, center);
  const int ng = ctx.net.n_gen(), nl = ctx.net.n_load();
  JacobianMatrix out;
  out.J.resize(ng, nl);
  out.provenance = Provenance::FiniteDifference;
  out.step = step;
  for (int j = 0; j < nl; ++j) {
    Eigen::VectorXd lp = load, lm = load;
    lp[j] += step;
    lm[j] -= step;
    BindingSet bp, bm;
    const Eigen::VectorXd sp = solve_at(lp, bp);
    const Eigen::VectorXd sm = solve_at(lm, bm);
    if (bp.canonical() != center.canonical() || bm.canonical() != center.canonical())
      throw RegionBoundary("binding set changes within the step along load " +
                           std::to_string(j + 1));
    out.J.col(j) = (sp - sm) / (2.0 * step);
  }
  return out;
}

std::vector<BindingCombo> enumerate_binding_combos(const PowerNetwork& net,
                                                   std::size_t max_combos, double rank_tol) {
  const int ng = net.n_gen(), ne = net.n_edge();
  const int k = ng - 1;

  auto binom = [](int n, int r) -> double {
    if (r < 0 || r > n) return 0.0;
    double v = 1.0;
    for (int i = 1; i <= r; ++i) v = v * (n - r + i) / i;
    return v;
  };
  double total = 0.0;
  for (int g = std::min(k, ng); g >= 0; --g) total += binom(ng, g) * binom(ne, k - g);
  if (total > static_cast<double>(max_combos))
    throw BudgetExceeded("binding combo count " + std::to_string(static_cast<long long>(total)) +
                         " exceeds budget " + std::to_string(max_combos));

  // Visits every r-subset of {0..n-1} in lexicographic order.
  auto subsets = [](int n, int r, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> idx(r);
    for (int i = 0; i < r; ++i) idx[i] = i;
    while (true) {
      visit(idx);
      int i = r - 1;
      while (i >= 0 && idx[i] == n - r + i) --i;
      if (i < 0) return;
      ++idx[i];
      for (int t = i + 1; t < r; ++t) idx[t] = idx[t - 1] + 1;
    }
  };

  std::vector<BindingCombo> out;
  out.reserve(static_cast<std::size_t>(total));
  for (int g = std::min(k, ng); g >= 0; --g) {
    if (k - g > ne) continue;
    subsets(ng, g, [&](const std::vector<int>& gens) {
      subsets(ne, k - g, [&](const std::vector<int>& branches) {
        BindingCombo c{gens, branches, false};
        c.independent = is_independent(net, gens, branches, rank_tol);
        out.push_back(std::move(c));
      });
    });
  }
  return out;
}

std::vector<WorstCase> worst_case_table(const PowerNetwork& net, std::size_t max_combos) {
  const int ng = net.n_gen(), nl = net.n_load();
  std::vector<WorstCase> table(static_cast<std::size_t>(ng) * nl);
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < nl; ++j) {
      auto& w = table[static_cast<std::size_t>(i) * nl + j];
      w.gen = i;
      w.load = j;
      w.value = -1.0;
    }
  for (const auto& c : enumerate_binding_combos(net, max_combos)) {
    if (!c.independent) continue;
    const Eigen::MatrixXd jac = closed_form_jacobian(net, c.gens, c.branches).J;
    for (int i = 0; i < ng; ++i)
      for (int j = 0; j < nl; ++j) {
        auto& w = table[static_cast<std::size_t>(i) * nl + j];
        if (std::abs(jac(i, j)) > w.value) {
          w.value = std::abs(jac(i, j));
          w.signed_value = jac(i, j);
          w.combo = c;
        }
      }
  }
  return table;
}

WorstCase worst_case_sensitivity(const PowerNetwork& net, int gen, int load,
                                 std::size_t max_combos) {
  if (gen < 0 || gen >= net.n_gen()) throw InvalidInput("generator index out of range");
  if (load < 0 || load >= net.n_load()) throw InvalidInput("load index out of range");
  WorstCase best;
  best.gen = gen;
  best.load = load;
  best.value = -1.0;
  for (const auto& c : enumerate_binding_combos(net, max_combos)) {
    if (!c.independent) continue;
    const double v = closed_form_jacobian(net, c.gens, c.branches).J(gen, load);
    if (std::abs(v) > best.value) {
      best.value = std::abs(v);
      best.signed_value = v;
      best.combo = c;
    }
  }
  return best;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + std::to_string(v[k] + 1);
  return s;
}

}  // namespace

std::string jacobian_csv(const JacobianMatrix& j) {
  std::ostringstream os;
  for (Eigen::Index r = 0; r < j.J.rows(); ++r) {
    for (Eigen::Index c = 0; c < j.J.cols(); ++c) os << (c ? "," : "") << fmt(j.J(r, c));
    os << '\n';
  }
  return os.str();
}

std::string worst_case_csv(const std::vector<WorstCase>& table) {
  std::ostringstream os;
  os << "i,j,value,S_G,S_B\n";
  for (const auto& w : table)
    os << w.gen + 1 << ',' << w.load + 1 << ',' << fmt(w.value) << ',' << join(w.combo.gens)
       << ',' << join(w.combo.branches) << '\n';
  return os.str();
}

}  // namespace opfgrad
