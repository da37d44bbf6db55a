#include "opfgrad/sweep.hpp"

#include "opfgrad/errors.hpp"
#include "opfgrad/jacobian.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <thread>

namespace opfgrad {

const char* to_string(RegionClass c) {
  switch (c) {
    case RegionClass::None: return "None";
    case RegionClass::TwoGens: return "TwoGens";
    case RegionClass::GenBranch: return "GenBranch";
    case RegionClass::TwoBranches: return "TwoBranches";
  }
  return "Unknown";
}

RegionClass classify(const BindingSet& bs) {
  if (bs.gens.empty() && bs.branches.empty()) return RegionClass::None;
  if (bs.branches.empty()) return RegionClass::TwoGens;
  if (bs.gens.empty()) return RegionClass::TwoBranches;
  return RegionClass::GenBranch;
}

const char* to_string(CellStatus s) {
  switch (s) {
    case CellStatus::Infeasible: return "Infeasible";
    case CellStatus::Regular: return "Regular";
    case CellStatus::Degenerate: return "Degenerate";
  }
  return "Unknown";
}

int RegionGrid::count(CellStatus s) const {
  return static_cast<int>(
      std::count_if(cells.begin(), cells.end(), [s](const Cell& c) { return c.status == s; }));
}

double RegionGrid::degenerate_fraction() const {
  const int f = feasible_cells();
  return f ? static_cast<double>(count(CellStatus::Degenerate)) / f : 0.0;
}

std::vector<int> RegionGrid::significant_regions(double threshold) const {
  std::vector<int> out;
  for (std::size_t r = 0; r < regions.size(); ++r)
    if (regions[r].area_fraction >= threshold) out.push_back(static_cast<int>(r));
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void run_parallel(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int k = 0; k < count; ++k) fn(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int k = t; k < count; k += threads) fn(k);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void check_axis(const Axis& a) {
  if (a.resolution < 1) throw InvalidInput("axis resolution must be at least 1");
  if (!(a.hi > a.lo)) throw InvalidInput("axis range must satisfy lo < hi");
}

}  // namespace

std::string RegionGrid::to_csv() const {
  std::ostringstream os;
  os << "x,y,status,region_hash,class\n";
  for (int iy = 0; iy < y.resolution; ++iy)
    for (int ix = 0; ix < x.resolution; ++ix) {
      const Cell& c = cell(ix, iy);
      os << fmt(x.at(ix)) << ',' << fmt(y.at(iy)) << ',' << to_string(c.status) << ',';
      if (c.region >= 0) os << regions[c.region].hash << ',' << to_string(regions[c.region].cls);
      else os << ',';
      os << '\n';
    }
  return os.str();
}

std::string RegionGrid::to_json(double threshold) const {
  using nlohmann::ordered_json;
  ordered_json j;
  auto axis = [](const Axis& a) {
    ordered_json o;
    o["name"] = a.name;
    o["lo"] = a.lo;
    o["hi"] = a.hi;
    o["resolution"] = a.resolution;
    return o;
  };
  j["x"] = axis(x);
  j["y"] = axis(y);
  j["cells"] = {{"Infeasible", count(CellStatus::Infeasible)},
                {"Regular", count(CellStatus::Regular)},
                {"Degenerate", count(CellStatus::Degenerate)}};
  j["degenerate_fraction"] = degenerate_fraction();
  j["small_region_threshold"] = threshold;
  j["significant_regions"] = significant_regions(threshold).size();
  ordered_json table = ordered_json::array();
  for (const auto& r : regions) {
    ordered_json o;
    o["hash"] = r.hash;
    o["binding_set"] = r.binding.canonical();
    o["class"] = to_string(r.cls);
    o["cells"] = r.cells;
    o["area_fraction"] = r.area_fraction;
    o["significant"] = r.area_fraction >= threshold;
    o["representative"] = {r.x, r.y};
    ordered_json jac = ordered_json::array();
    for (Eigen::Index i = 0; i < r.jacobian.rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index k = 0; k < r.jacobian.cols(); ++k) row.push_back(r.jacobian(i, k));
      jac.push_back(row);
    }
    o["jacobian"] = jac;
    table.push_back(o);
  }
  j["regions"] = table;
  return j.dump(2);
}

RegionGrid scan_load_plane(const OpfContext& ctx, const Eigen::VectorXd& fixed_loads,
                           int axis_a, int axis_b, Axis range_a, Axis range_b,
                           const ScanOptions& opts) {
  const int nl = ctx.net.n_load(), ng = ctx.net.n_gen();
  if (fixed_loads.size() != nl) throw InvalidInput("fixed loads have the wrong length");
  if (axis_a < 0 || axis_a >= nl || axis_b < 0 || axis_b >= nl || axis_a == axis_b)
    throw InvalidInput("scan axes must be two distinct load indices");
  check_axis(range_a);
  check_axis(range_b);

  RegionGrid grid;
  grid.x = range_a;
  grid.y = range_b;
  const int nx = range_a.resolution, ny = range_b.resolution;
  grid.cells.assign(static_cast<std::size_t>(nx) * ny, Cell{});
  std::vector<BindingSet> sets(grid.cells.size());

  run_parallel(nx * ny, opts.threads, [&](int k) {
    const int ix = k % nx, iy = k / nx;
    Eigen::VectorXd load = fixed_loads;
    load[axis_a] = range_a.at(ix);
    load[axis_b] = range_b.at(iy);
    Cell& cell = grid.cells[k];
    if (load.minCoeff() <= 0.0) return;
    const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, load);
    const DispatchSolution sol = solve_lp(lp);
    if (!sol.optimal()) return;
    sets[k] = detect_binding(sol, lp, ctx.limits, opts.binding_tol, opts.rank_tol);
    const bool regular = sets[k].count() == ng - 1 &&
                         sets[k].rank_certificate == lp.n_eq() + sets[k].count();
    cell.status = regular ? CellStatus::Regular : CellStatus::Degenerate;
  });

  std::map<std::string, int> index;
  for (std::size_t k = 0; k < grid.cells.size(); ++k) {
    Cell& cell = grid.cells[k];
    if (cell.status != CellStatus::Regular) continue;
    const std::string key = sets[k].canonical();
    auto it = index.find(key);
    if (it == index.end()) {
      RegionInfo info;
      info.binding = sets[k];
      info.hash = sets[k].hash();
      info.cls = classify(sets[k]);
      info.x = range_a.at(static_cast<int>(k) % nx);
      info.y = range_b.at(static_cast<int>(k) / nx);
      const BindingCombo combo = BindingCombo::from(sets[k]);
      if (is_independent(ctx.net, combo.gens, combo.branches, opts.rank_tol))
        info.jacobian = closed_form_jacobian(ctx.net, combo.gens, combo.branches).J;
      it = index.emplace(key, static_cast<int>(grid.regions.size())).first;
      grid.regions.push_back(std::move(info));
    }
    cell.region = it->second;
    ++grid.regions[it->second].cells;
  }
  const int feasible = grid.feasible_cells();
  for (auto& r : grid.regions) r.area_fraction = feasible ? static_cast<double>(r.cells) / feasible : 0.0;
  return grid;
}

LoadBox LoadBox::plane(const Eigen::VectorXd& base, int axis_a, double lo_a, double hi_a,
                       int axis_b, double lo_b, double hi_b) {
  LoadBox box{base, base};
  box.lower[axis_a] = lo_a;
  box.upper[axis_a] = hi_a;
  box.lower[axis_b] = lo_b;
  box.upper[axis_b] = hi_b;
  return box;
}

bool positive_load_feasible(const PowerNetwork& net, const CapacityLimits& limits,
                            const LoadBox& box, double tol) {
  const int ng = net.n_gen(), nb = net.n_bus(), nl = net.n_load(), ne = net.n_edge();
  if (box.lower.size() != nl || box.upper.size() != nl)
    throw InvalidInput("load box has the wrong length");
  if ((box.upper - box.lower).minCoeff() < 0.0) return false;

  // Columns: [s^g, theta, p, s^l, t, r]; rows: slack angle, balance, flow
  // definition, s^l - t - r = 0 (s^l - r = 0 for fixed loads).
  const int c_sg = 0, c_th = ng, c_p = ng + nb, c_sl = c_p + ne, c_t = c_sl + nl, c_r = c_t + 1;
  const int ncol = c_r + nl, nrow = 1 + nb + ne + nl;
  const double inf = std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd lap = laplacian(net);
  const Eigen::MatrixXd bct = flow_matrix(net);

  BoundedLP lp;
  lp.A = Eigen::MatrixXd::Zero(nrow, ncol);
  lp.b = Eigen::VectorXd::Zero(nrow);
  lp.c = Eigen::VectorXd::Zero(ncol);
  lp.lower = Eigen::VectorXd::Constant(ncol, -inf);
  lp.upper = Eigen::VectorXd::Constant(ncol, inf);

  lp.A(0, c_th) = 1.0;
  lp.A.block(1, c_th, nb, nb) = lap;
  lp.A.block(1, c_sg, ng, ng) = -Eigen::MatrixXd::Identity(ng, ng);
  lp.A.block(1 + ng, c_sl, nl, nl).setIdentity();
  lp.A.block(1 + nb, c_th, ne, nb) = bct;
  lp.A.block(1 + nb, c_p, ne, ne) = -Eigen::MatrixXd::Identity(ne, ne);
  const int r0 = 1 + nb + ne;
  lp.A.block(r0, c_sl, nl, nl).setIdentity();
  lp.A.block(r0, c_t, nl, 1).setConstant(-1.0);
  lp.A.block(r0, c_r, nl, nl) = -Eigen::MatrixXd::Identity(nl, nl);
  // Fixed loads only need to be positive; t measures the free ones.
  for (int j = 0; j < nl; ++j) {
    if (box.upper[j] != box.lower[j]) continue;
    if (!(box.lower[j] > 0.0)) return false;
    lp.A(r0 + j, c_t) = 0.0;
  }

  lp.lower.segment(c_sg, ng) = limits.sg_min;
  lp.upper.segment(c_sg, ng) = limits.sg_max;
  lp.lower.segment(c_p, ne) = limits.p_min;
  lp.upper.segment(c_p, ne) = limits.p_max;
  lp.lower.segment(c_sl, nl) = box.lower;
  lp.upper.segment(c_sl, nl) = box.upper;
  lp.upper[c_t] = 1.0;
  lp.lower.segment(c_r, nl).setZero();
  lp.c[c_t] = -1.0;

  const SimplexResult res = solve_bounded_lp(lp);
  return res.status == LpStatus::Optimal && res.x[c_t] > tol;
}

LimitCellProbe probe_limit_cell(const OpfContext& ctx, const LoadBox& box, int branch,
                                double p_min, double p_max, const LimitScanOptions& opts,
                                std::uint64_t cell_seed) {
  LimitCellProbe probe;
  if (branch < 0 || branch >= ctx.net.n_edge()) throw InvalidInput("branch index out of range");
  if (p_min >= p_max) return probe;
  OpfContext local = ctx;
  local.limits.p_min[branch] = p_min;
  local.limits.p_max[branch] = p_max;
  if (!positive_load_feasible(local.net, local.limits, box, opts.feasibility_tol)) return probe;

  std::mt19937_64 rng(mix(cell_seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int nl = ctx.net.n_load();
  const int budget = opts.samples * std::max(1, opts.attempts_factor);
  for (int attempt = 0; attempt < budget && probe.tested < opts.samples; ++attempt) {
    Eigen::VectorXd load(nl);
    for (int j = 0; j < nl; ++j)
      load[j] = box.lower[j] + (box.upper[j] - box.lower[j]) * unit(rng);
    if (load.minCoeff() <= 0.0) continue;
    const StandardLP lp = assemble_lp(local.net, local.cost, local.limits, load);
    const DispatchSolution sol = solve_lp(lp);
    if (!sol.optimal()) continue;
    ++probe.tested;
    if (!regularity_report(sol, lp, local.limits, opts.regularity).regular()) ++probe.irregular;
  }
  // A feasible set too thin to sample counts as degenerate.
  const bool degenerate = probe.tested == 0 ||
                          probe.irregular > opts.degenerate_fraction * probe.tested;
  probe.status = degenerate ? CellStatus::Degenerate : CellStatus::Regular;
  return probe;
}

RegionGrid scan_limit_plane(const OpfContext& ctx, const LoadBox& box, int branch,
                            Axis lower_range, Axis upper_range, const LimitScanOptions& opts) {
  check_axis(lower_range);
  check_axis(upper_range);
  RegionGrid grid;
  grid.x = lower_range;
  grid.y = upper_range;
  const int nx = lower_range.resolution, ny = upper_range.resolution;
  grid.cells.assign(static_cast<std::size_t>(nx) * ny, Cell{});
  run_parallel(nx * ny, opts.threads, [&](int k) {
    const int ix = k % nx, iy = k / nx;
    const std::uint64_t seed = opts.seed ^ mix(static_cast<std::uint64_t>(k));
    grid.cells[k].status =
        probe_limit_cell(ctx, box, branch, lower_range.at(ix), upper_range.at(iy), opts, seed)
            .status;
  });
  return grid;
}

double PathTrace::max_affine_residual() const {
  double worst = 0.0;
  for (const auto& [begin, end] : segments) {
    if (samples[begin].status != LpStatus::Optimal || end - begin < 3) continue;
    const int n = end - begin;
    Eigen::MatrixXd design(n, 2);
    for (int k = 0; k < n; ++k) design.row(k) << 1.0, samples[begin + k].t;
    const auto qr = design.colPivHouseholderQr();
    const int ng = static_cast<int>(samples[begin].sg.size());
    for (int i = 0; i < ng; ++i) {
      Eigen::VectorXd v(n);
      for (int k = 0; k < n; ++k) v[k] = samples[begin + k].sg[i];
      const Eigen::VectorXd coef = qr.solve(v);
      worst = std::max(worst, (design * coef - v).lpNorm<Eigen::Infinity>());
    }
  }
  return worst;
}

std::string PathTrace::to_csv() const {
  std::ostringstream os;
  if (samples.empty()) return "";
  const auto nl = samples.front().load.size();
  Eigen::Index ng = 0;
  for (const auto& s : samples)
    if (s.status == LpStatus::Optimal) ng = s.sg.size();
  os << "t";
  for (Eigen::Index j = 0; j < nl; ++j) os << ",load" << j + 1;
  for (Eigen::Index i = 0; i < ng; ++i) os << ",sg" << i + 1;
  os << ",objective,region_hash\n";
  for (const auto& s : samples) {
    os << fmt(s.t);
    for (Eigen::Index j = 0; j < nl; ++j) os << ',' << fmt(s.load[j]);
    for (Eigen::Index i = 0; i < ng; ++i)
      os << ',' << (s.status == LpStatus::Optimal ? fmt(s.sg[i]) : "");
    os << ',' << (s.status == LpStatus::Optimal ? fmt(s.objective) : "") << ',' << s.hash << '\n';
  }
  return os.str();
}

PathTrace trace_load_path(const OpfContext& ctx, const std::vector<Eigen::VectorXd>& waypoints,
                          int samples, double binding_tol) {
  if (waypoints.empty()) throw InvalidInput("path needs at least one waypoint");
  if (samples < 1) throw InvalidInput("path needs at least one sample");
  const int nl = ctx.net.n_load();
  for (const auto& w : waypoints)
    if (w.size() != nl) throw InvalidInput("waypoint has the wrong length");

  const int legs = std::max(1, static_cast<int>(waypoints.size()) - 1);
  std::vector<double> cum(waypoints.size(), 0.0);
  for (std::size_t k = 1; k < waypoints.size(); ++k)
    cum[k] = cum[k - 1] + (waypoints[k] - waypoints[k - 1]).norm();
  const double total = cum.back();

  PathTrace trace;
  for (int k = 0; k < samples; ++k) {
    PathSample s;
    s.t = samples == 1 ? 0.0 : static_cast<double>(k) / (samples - 1);
    if (total == 0.0) {
      s.load = waypoints.front();
    } else {
      const double arc = s.t * total;
      int leg = 0;
      for (int i = 0; i < legs; ++i)
        if (cum[i + 1] > cum[i] && arc >= cum[i]) leg = i;
      s.leg = leg;
      const double len = cum[leg + 1] - cum[leg];
      const double frac = std::clamp((arc - cum[leg]) / len, 0.0, 1.0);
      s.load = waypoints[leg] + frac * (waypoints[leg + 1] - waypoints[leg]);
    }
    const StandardLP lp = assemble_lp(ctx.net, ctx.cost, ctx.limits, s.load);
    const DispatchSolution sol = solve_lp(lp);
    s.status = sol.status;
    if (sol.optimal()) {
      s.sg = sol.sg;
      s.objective = sol.objective;
      s.binding = detect_binding(sol, lp, ctx.limits, binding_tol);
      s.hash = s.binding.hash();
    } else {
      s.hash = "infeasible";
    }
    trace.samples.push_back(std::move(s));
  }

  int begin = 0;
  for (int k = 1; k <= samples; ++k) {
    const bool boundary = k == samples || trace.samples[k].hash != trace.samples[k - 1].hash ||
                          trace.samples[k].leg != trace.samples[k - 1].leg;
    if (k < samples && trace.samples[k].hash != trace.samples[k - 1].hash)
      trace.region_changes.push_back(k);
    if (boundary) {
      trace.segments.emplace_back(begin, k);
      begin = k;
    }
  }
  return trace;
}

}  // namespace opfgrad
