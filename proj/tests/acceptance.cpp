// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "support.hpp"

#include "opfgrad/conic.hpp"
#include "opfgrad/errors.hpp"
#include "opfgrad/jacobian.hpp"
#include "opfgrad/opf_operator.hpp"
#include "opfgrad/sweep.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>

using namespace opfgrad;
using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s [%d] %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const Axis kAxis4{"load 4", -0.35, 7.0, 200};
const Axis kAxis7{"load 7", -0.35, 7.0, 200};

Eigen::VectorXd plane_load(double s4, double s7) {
  Eigen::VectorXd load = case9().base_load;
  load[0] = s4;
  load[3] = s7;
  return load;
}

RegionGrid plane_scan(const OpfContext& ctx) {
  ScanOptions opts;
  opts.threads = 4;
  return scan_load_plane(ctx, case9().base_load, 0, 3, kAxis4, kAxis7, opts);
}

bool border_infeasible(const RegionGrid& g) {
  const int nx = g.x.resolution, ny = g.y.resolution;
  bool left = false, right = false, bottom = false, top = false;
  for (int k = 0; k < ny; ++k) {
    left |= g.cell(0, k).status == CellStatus::Infeasible;
    right |= g.cell(nx - 1, k).status == CellStatus::Infeasible;
  }
  for (int k = 0; k < nx; ++k) {
    bottom |= g.cell(k, 0).status == CellStatus::Infeasible;
    top |= g.cell(k, ny - 1).status == CellStatus::Infeasible;
  }
  return left && right && bottom && top;
}

// 1. Regularity over random feasible loads at the red point.
void criterion1() {
  const auto t0 = Clock::now();
  const OpfContext ctx = case9_context();
  std::mt19937_64 rng(101);
  int feasible = 0, regular = 0;
  while (feasible < 1000) {
    const Eigen::VectorXd load = uniform_vec(rng, 6, 1e-9, 2.5);
    const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, load);
    const DispatchSolution sol = solve_lp(lp);
    if (!sol.optimal()) continue;
    ++feasible;
    const RegularityReport r = regularity_report(sol, lp, ctx.limits);
    if (r.binding_count == 2 && r.rank_ok) ++regular;
  }
  const double secs = seconds_since(t0);
  report(1, regular >= 990 && secs < 30.0, "9-bus regularity at the red point",
         std::to_string(regular) + "/1000 regular, " + fmt("%.2f s", secs));
}

// 2 and 3. Region map and degenerate slice.
RegionGrid criterion2() {
  const auto t0 = Clock::now();
  const RegionGrid g = plane_scan(case9_context());
  const double secs = seconds_since(t0);
  const std::vector<int> sig = g.significant_regions(kDefaultSmallRegion);
  std::set<RegionClass> classes;
  std::string names;
  for (int r : sig) {
    classes.insert(g.regions[r].cls);
    names += (names.empty() ? "" : " ") + g.regions[r].binding.canonical();
  }
  const bool all_classes = classes.count(RegionClass::TwoGens) &&
                           classes.count(RegionClass::GenBranch) &&
                           classes.count(RegionClass::TwoBranches);
  report(2, sig.size() == 7 && all_classes && border_infeasible(g) && secs < 60.0,
         "seven regions over loads 4 and 7",
         std::to_string(sig.size()) + " regions [" + names + "], " + fmt("%.2f s", secs));
  return g;
}

void criterion3() {
  const RegionGrid g = plane_scan(case9_context(-3.0758, 3.0758));
  const double frac = g.degenerate_fraction();
  report(3, frac > 0.01, "degenerate slice at the black point",
         "degenerate fraction " + fmt("%.4f", frac));
}

// 4. Closed form, finite differences and conic at interior points of every region.
void criterion4(const RegionGrid& g) {
  const auto t0 = Clock::now();
  const OpfContext ctx = case9_context();
  std::map<int, std::vector<std::pair<int, int>>> cells;
  for (int iy = 0; iy < g.y.resolution; ++iy)
    for (int ix = 0; ix < g.x.resolution; ++ix)
      if (g.cell(ix, iy).status == CellStatus::Regular) cells[g.cell(ix, iy).region].push_back({ix, iy});
  const std::vector<int> sig = g.significant_regions();
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  double worst = 0.0;
  int done = 0, skipped = 0;
  std::set<int> visited;
  for (std::size_t k = 0; done < 25; ++k) {
    const int r = sig[k % sig.size()];
    const auto& pool = cells[r];
    const auto [ix, iy] = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    const double dx = (g.x.hi - g.x.lo) / g.x.resolution, dy = (g.y.hi - g.y.lo) / g.y.resolution;
    const Eigen::VectorXd load = plane_load(g.x.at(ix) + jitter(rng) * dx, g.y.at(iy) + jitter(rng) * dy);
    try {
      const OperatorValue v = evaluate(ctx, load);
      const BindingCombo combo = BindingCombo::from(v.binding);
      const Eigen::MatrixXd cf = closed_form_jacobian(ctx.net, combo.gens, combo.branches).J;
      const Eigen::MatrixXd fd = fd_jacobian(ctx, load, 1e-6).J;
      const Eigen::MatrixXd cj = conic_jacobian(ctx, load).J;
      worst = std::max({worst, max_abs(cf - fd), max_abs(cf - cj), max_abs(fd - cj)});
      visited.insert(r);
      ++done;
    } catch (const Error&) {
      ++skipped;
    }
  }
  const double secs = seconds_since(t0);
  report(4, worst <= 1e-6 && secs < 10.0, "closed form, finite difference and conic agree",
         "25 points in " + std::to_string(visited.size()) + " regions, max diff " +
             fmt("%.2e", worst) + ", " + fmt("%.2f s", secs));
}

// 5. Conservation and frozen rows.
void criterion5() {
  const PowerNetwork net = case9().network;
  double cons = 0.0, frozen = 0.0;
  int n = 0;
  for (const auto& combo : enumerate_binding_combos(net)) {
    if (!combo.independent) continue;
    ++n;
    const Eigen::MatrixXd j = closed_form_jacobian(net, combo.gens, combo.branches).J;
    cons = std::max(cons, max_abs(j.colwise().sum() - Eigen::RowVectorXd::Ones(j.cols())));
    for (int g : combo.gens) frozen = std::max(frozen, max_abs(j.row(g)));
  }
  report(5, cons <= 1e-9 && frozen <= 1e-12, "conservation and bound-generator rows",
         std::to_string(n) + " combos, " + fmt("sum err %.1e", cons) + fmt(", row err %.1e", frozen));
}

// 6. Range equivalence on a four-bus network.
void criterion6() {
  const PowerNetwork net = four_bus();
  std::vector<Eigen::MatrixXd> family;
  bool constructed = true;
  for (const auto& combo : enumerate_binding_combos(net)) {
    if (!combo.independent) continue;
    family.push_back(closed_form_jacobian(net, combo.gens, combo.branches).J);
    try {
      const ConstructedInstance inst = construct_parameters_for_binding(net, combo.gens, combo.branches);
      const OperatorValue v = evaluate(inst.context(net), inst.load);
      constructed &= v.binding.canonical() == inst.target.canonical();
    } catch (const Error&) {
      constructed = false;
    }
  }
  std::mt19937_64 rng(606);
  int tested = 0, matched = 0, skipped = 0;
  for (int s = 0; s < 10000; ++s) {
    CapacityLimits lim;
    lim.sg_min = uniform_vec(rng, 2, 0.0, 0.5);
    lim.sg_max = lim.sg_min + uniform_vec(rng, 2, 0.5, 3.0);
    lim.p_max = uniform_vec(rng, 5, 0.2, 3.0);
    lim.p_min = -uniform_vec(rng, 5, 0.2, 3.0);
    const OpfContext ctx{net, uniform_vec(rng, 2, 0.1, 2.0), lim};
    const Eigen::VectorXd load = uniform_vec(rng, 2, 0.05, 2.0);
    JacobianMatrix fd;
    try {
      fd = fd_jacobian(ctx, load);
    } catch (const Error&) {
      ++skipped;
      continue;
    }
    ++tested;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& j : family) best = std::min(best, max_abs(fd.J - j));
    if (best <= 1e-6) ++matched;
  }
  report(6, tested > 0 && matched == tested && constructed, "range equivalence on four buses",
         std::to_string(matched) + "/" + std::to_string(tested) + " matched, " +
             std::to_string(skipped) + " infeasible or on a boundary, " +
             std::to_string(family.size()) + " combos constructed " + (constructed ? "ok" : "with errors"));
}

// 7. Worst case reproduced by construction.
void criterion7() {
  const PowerNetwork net = case9().network;
  double worst = 0.0;
  int ok = 0;
  const auto table = worst_case_table(net);
  for (const auto& w : table) {
    try {
      const ConstructedInstance inst = construct_parameters_for_binding(net, w.combo.gens, w.combo.branches);
      const JacobianMatrix fd = fd_jacobian(inst.context(net), inst.load);
      const double err = std::abs(std::abs(fd.J(w.gen, w.load)) - w.value);
      worst = std::max(worst, err);
      if (err <= 1e-6) ++ok;
    } catch (const Error&) {
      worst = std::numeric_limits<double>::infinity();
    }
  }
  report(7, ok == static_cast<int>(table.size()), "worst case reproduced by construction",
         std::to_string(ok) + "/" + std::to_string(table.size()) + " pairs, max err " + fmt("%.2e", worst));
}

// 8. Conic engine sanity.
void criterion8() {
  const OpfContext ctx = case9_context();
  const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, plane_load(1.0, 1.0));
  const ConicProblem p = to_conic(lp);
  const Eigen::MatrixXd q = assemble_Q(p);
  const bool skew = (q + q.transpose()).isZero(0.0);
  const ConicDerivative d =
      solution_map_derivative(p, embed_from_dispatch(p, solve_lp(lp)), PerturbationTriple::zeros(p.m(), p.n()));
  const bool zero = d.dx.isZero(0.0) && d.dy.isZero(0.0) && d.ds.isZero(0.0);
  std::mt19937_64 rng(808);
  double moreau = 0.0;
  for (int t = 0; t < 10000; ++t) {
    const Eigen::VectorXd z = uniform_vec(rng, p.n() + p.m() + 1, -10.0, 10.0);
    moreau = std::max(moreau, max_abs(project_C(z, p.n(), p.cones) + project_polar_C(z, p.n(), p.cones) - z));
  }
  report(8, skew && zero && moreau <= 1e-12, "conic engine sanity",
         std::string(skew ? "Q skew" : "Q not skew") + ", " + (zero ? "zero derivative" : "nonzero derivative") +
             ", Moreau " + fmt("%.1e", moreau));
}

// 9. KKT residuals and duality gap on random instances.
void criterion9() {
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> ng(1, 4), nl(1, 8), extra(0, 6);
  double worst = 0.0;
  int solved = 0;
  while (solved < 200) {
    const PowerNetwork net = random_network(rng, ng(rng), nl(rng), extra(rng));
    CapacityLimits lim;
    lim.sg_min = uniform_vec(rng, net.n_gen(), 0.0, 0.3);
    lim.sg_max = lim.sg_min + uniform_vec(rng, net.n_gen(), 0.5, 4.0);
    lim.p_max = uniform_vec(rng, net.n_edge(), 0.3, 3.0);
    lim.p_min = -uniform_vec(rng, net.n_edge(), 0.3, 3.0);
    const Eigen::VectorXd cost = uniform_vec(rng, net.n_gen(), 0.1, 2.0);
    const Eigen::VectorXd load = uniform_vec(rng, net.n_load(), 0.05, 1.0);
    const StandardLP lp = assemble_lp(net, cost, lim, load);
    const DispatchSolution sol = solve_lp(lp);
    if (!sol.optimal()) continue;
    ++solved;
    worst = std::max(worst, kkt_residuals(sol, lp).max());
  }
  report(9, worst <= 1e-8, "KKT residuals and duality gap", "200 instances, max " + fmt("%.2e", worst));
}

// 10. Path through the region map.
void criterion10(const RegionGrid& g) {
  const OpfContext ctx = case9_context();
  // Region centroids, visited in angular order around their mean.
  std::vector<std::array<double, 3>> pts;
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (int r : g.significant_regions()) {
    double sx = 0, sy = 0;
    int n = 0;
    for (int iy = 0; iy < g.y.resolution; ++iy)
      for (int ix = 0; ix < g.x.resolution; ++ix)
        if (g.cell(ix, iy).region == r) sx += g.x.at(ix), sy += g.y.at(iy), ++n;
    pts.push_back({sx / n, sy / n, 0.0});
    mean += Eigen::Vector2d(sx / n, sy / n);
  }
  mean /= static_cast<double>(pts.size());
  for (auto& p : pts) p[2] = std::atan2(p[1] - mean.y(), p[0] - mean.x());
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a[2] < b[2]; });
  std::vector<Eigen::VectorXd> way;
  for (const auto& p : pts) way.push_back(plane_load(p[0], p[1]));

  const PathTrace trace = trace_load_path(ctx, way, 50);
  std::set<std::string> regions;
  for (const auto& s : trace.samples) regions.insert(s.hash);

  // Independent arc-length parametrization of the same path.
  std::vector<double> cum{0.0};
  for (std::size_t k = 1; k < way.size(); ++k) cum.push_back(cum.back() + (way[k] - way[k - 1]).norm());
  const auto path_at = [&](double t) {
    const double s = t * cum.back();
    std::size_t k = 1;
    while (k + 1 < cum.size() && cum[k] < s) ++k;
    const double w = (s - cum[k - 1]) / (cum[k] - cum[k - 1]);
    return Eigen::VectorXd((1.0 - w) * way[k - 1] + w * way[k]);
  };
  const auto hash_at = [&](double t) {
    const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, path_at(t));
    const DispatchSolution sol = solve_lp(lp);
    return sol.optimal() ? detect_binding(sol, lp, ctx.limits).hash() : std::string("infeasible");
  };
  bool located = true;
  for (std::size_t k = 0; k < trace.samples.size(); ++k)
    located &= (path_at(trace.samples[k].t) - trace.samples[k].load).norm() <= 1e-9;
  // Every sample interval is probed finely: it must hold a boundary exactly
  // when the trace reports a change there. Binding detection widens each
  // boundary into a band of about binding_tol, so probes step past it.
  const std::set<int> changes(trace.region_changes.begin(), trace.region_changes.end());
  const double delta = 1e-6;
  int crossings = 0;
  for (std::size_t k = 1; k < trace.samples.size(); ++k) {
    const double t0 = trace.samples[k - 1].t, t1 = trace.samples[k].t;
    const std::string& prev = trace.samples[k - 1].hash;
    bool moved = false;
    for (int q = 1; q <= 32 && !moved; ++q) moved = hash_at(t0 + (t1 - t0) * q / 33.0) != prev;
    moved |= trace.samples[k].hash != prev;
    located &= moved == (changes.count(static_cast<int>(k)) == 1);
    if (!moved) continue;
    double lo = t0, hi = t1;
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      (hash_at(mid) == prev ? lo : hi) = mid;
    }
    located &= lo > t0 && hi < t1 && hash_at(lo - delta) == prev && hash_at(hi + delta) != prev;
    ++crossings;
  }
  const double resid = trace.max_affine_residual();
  report(10, regions.size() >= 4 && resid <= 1e-8 && located, "piecewise-affine path trace",
         std::to_string(regions.size()) + " regions, " + std::to_string(trace.region_changes.size()) +
             " changes, " + std::to_string(crossings) + " bisected boundaries, residual " + fmt("%.2e", resid) + (located ? ", boundaries located" : ", boundary mismatch"));
}

void guarded(const std::function<void()>& f, int id) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, false, "criterion raised", e.what());
  }
}

}  // namespace

int main() {
  guarded(criterion1, 1);
  RegionGrid red;
  guarded([&] { red = criterion2(); }, 2);
  guarded(criterion3, 3);
  guarded([&] { criterion4(red); }, 4);
  guarded(criterion5, 5);
  guarded(criterion6, 6);
  guarded(criterion7, 7);
  guarded(criterion8, 8);
  guarded(criterion9, 9);
  guarded([&] { criterion10(red); }, 10);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
