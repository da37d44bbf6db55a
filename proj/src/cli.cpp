#include "opfgrad/cli.hpp"

#include "opfgrad/case.hpp"
#include "opfgrad/conic.hpp"
#include "opfgrad/dcopf.hpp"
#include "opfgrad/errors.hpp"
#include "opfgrad/jacobian.hpp"
#include "opfgrad/opf_operator.hpp"
#include "opfgrad/report.hpp"
#include "opfgrad/sweep.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace opfgrad {

namespace {

using nlohmann::ordered_json;

// Thrown after the payload is written when the exit code must be 2.
struct DataStatus {
  std::string message;
};

struct Common {
  std::string case_path;
  std::string out_path;
  std::uint64_t seed = 0x5eed;
  std::string format = "json";
  std::vector<std::string> loads;
  double binding_tol = kDefaultBindingTol;
  double rank_tol = kDefaultRankTol;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("not a number: '" + s + "'");
  }
  if (used != s.size()) throw InvalidInput("not a number: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  if (v != static_cast<int>(v)) throw InvalidInput("not an integer: '" + s + "'");
  return static_cast<int>(v);
}

std::vector<std::pair<std::string, double>> parse_pairs(const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& item : items)
    for (const auto& tok : split(item, ',')) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos || eq == 0)
        throw InvalidInput("expected bus=value, got '" + tok + "'");
      out.emplace_back(tok.substr(0, eq), to_double(tok.substr(eq + 1)));
    }
  return out;
}

std::pair<double, double> parse_range(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw InvalidInput("expected lo,hi, got '" + s + "'");
  return {to_double(parts[0]), to_double(parts[1])};
}

// 1-based list "2,9" to sorted 0-based indices in [0, limit).
std::vector<int> parse_indices(const std::string& s, int limit, const char* what) {
  std::vector<int> out;
  for (const auto& tok : split(s, ',')) {
    const int k = to_int(tok);
    if (k < 1 || k > limit) throw InvalidInput(std::string(what) + " out of range: " + tok);
    out.push_back(k - 1);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end())
    throw InvalidInput(std::string("repeated ") + what);
  return out;
}

// Load buses are addressed by the labels printed by case-info.
int load_index(const CaseFile& c, const std::string& key) {
  const int ng = c.network.n_gen();
  for (int j = 0; j < c.network.n_load(); ++j)
    if (c.bus_labels[ng + j] == key) return j;
  throw InvalidInput("no load bus labelled '" + key + "'");
}

int gen_index(const CaseFile& c, const std::string& key) {
  for (int i = 0; i < c.network.n_gen(); ++i)
    if (c.bus_labels[i] == key) return i;
  throw InvalidInput("no generator bus labelled '" + key + "'");
}

Eigen::VectorXd loads_with(const CaseFile& c, const std::vector<std::string>& overrides,
                           bool require_positive = true) {
  Eigen::VectorXd load = c.base_load;
  for (const auto& [key, v] : parse_pairs(overrides)) load[load_index(c, key)] = v;
  if (require_positive) validate_load(load, c.network.n_load());
  return load;
}

ordered_json vec(const Eigen::VectorXd& v) {
  return ordered_json(std::vector<double>(v.data(), v.data() + v.size()));
}

ordered_json mat(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vec(m.row(i).transpose()));
  return rows;
}

ordered_json ones_based(const std::vector<int>& v) {
  ordered_json a = ordered_json::array();
  for (int k : v) a.push_back(k + 1);
  return a;
}

ordered_json combo_json(const BindingCombo& c) {
  return {{"S_G", ones_based(c.gens)}, {"S_B", ones_based(c.branches)},
          {"independent", c.independent}};
}

ordered_json binding_json(const BindingSet& bs) {
  return {{"canonical", bs.canonical()}, {"hash", bs.hash()},
          {"rank_certificate", bs.rank_certificate}};
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

void check_format(const Common& c) {
  if (c.format != "json" && c.format != "csv")
    throw InvalidInput("--format must be json or csv");
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  void emit(const Common& c, const std::string& payload) {
    if (c.out_path.empty()) {
      out_ << payload;
      return;
    }
    std::ofstream f(c.out_path, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot write " + c.out_path);
    f << payload;
    if (!f) throw std::ios_base::failure("cannot write " + c.out_path);
  }

  std::ostream& err() { return err_; }

 private:
  std::ostream& out_;
  std::ostream& err_;
};

void add_common(CLI::App* sub, Common& c, bool with_loads = true) {
  sub->add_option("--case", c.case_path, "Case file (JSON)")->required();
  sub->add_option("--out", c.out_path, "Output file (default stdout)");
  sub->add_option("--seed", c.seed, "Seed for randomized probes");
  sub->add_option("--format", c.format, "json or csv");
  if (with_loads)
    sub->add_option("--load", c.loads, "Load overrides bus=value (bus labels as in case-info)")
        ->expected(1, -1);
  sub->add_option("--binding-tol", c.binding_tol, "Relative binding tolerance");
  sub->add_option("--rank-tol", c.rank_tol, "Relative singular-value threshold");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"DC-OPF operator sensitivity toolkit", "opfgrad"};
  app.require_subcommand(1);
  Runner runner(out, err);
  Common c;
  std::function<void()> action;

  // solve
  {
    auto* sub = app.add_subcommand("solve", "Solve the OPF and dump the solution");
    add_common(sub, c);
    sub->callback([&] {
      action = [&] {
        const CaseFile cf = load_case(c.case_path);
        const Eigen::VectorXd load = loads_with(cf, c.loads);
        const StandardLP lp = assemble_lp(cf.network, cf.cost, cf.limits, load);
        const DispatchSolution sol = solve_lp(lp);
        runner.emit(c, solution_json(sol, lp, cf.limits, c.binding_tol) + "\n");
        if (!sol.optimal()) throw DataStatus{std::string("OPF ") + to_string(sol.status)};
      };
    });
  }

  // case-info
  {
    auto* sub = app.add_subcommand("case-info", "Describe a case file");
    add_common(sub, c, false);
    sub->callback([&] {
      action = [&] {
        const CaseFile cf = load_case(c.case_path);
        const auto& net = cf.network;
        ordered_json j;
        j["name"] = cf.name;
        j["mva_base"] = cf.mva_base;
        j["n_gen"] = net.n_gen();
        j["n_load"] = net.n_load();
        j["n_edge"] = net.n_edge();
        ordered_json gens = ordered_json::array();
        for (int i = 0; i < net.n_gen(); ++i)
          gens.push_back({{"bus", cf.bus_labels[i]}, {"cost", cf.cost[i]},
                          {"sg_min", cf.limits.sg_min[i]}, {"sg_max", cf.limits.sg_max[i]}});
        j["generators"] = gens;
        ordered_json loads = ordered_json::array();
        for (int k = 0; k < net.n_load(); ++k)
          loads.push_back({{"bus", cf.bus_labels[net.n_gen() + k]}, {"load", cf.base_load[k]}});
        j["loads"] = loads;
        ordered_json edges = ordered_json::array();
        for (int e = 0; e < net.n_edge(); ++e) {
          const Edge& ed = net.edges()[e];
          edges.push_back({{"branch", e + 1},
                           {"from", cf.bus_labels[ed.from - 1]},
                           {"to", cf.bus_labels[ed.to - 1]},
                           {"b", ed.susceptance},
                           {"p_min", cf.limits.p_min[e]},
                           {"p_max", cf.limits.p_max[e]}});
        }
        j["branches"] = edges;
        runner.emit(c, dump(j));
      };
    });
  }

  // jacobian
  std::string gens_opt, branches_opt;
  {
    auto* sub = app.add_subcommand("jacobian", "Closed-form Jacobian for a combo or a load point");
    add_common(sub, c);
    sub->add_option("--gens", gens_opt, "Binding generators, 1-based, comma separated");
    sub->add_option("--branches", branches_opt, "Binding branches, 1-based, comma separated");
    sub->callback([&] {
      action = [&] {
        check_format(c);
        const CaseFile cf = load_case(c.case_path);
        std::vector<int> sg, sb;
        ordered_json j;
        if (gens_opt.empty() && branches_opt.empty()) {
          const OpfContext ctx = OpfContext::from_case(cf);
          EvaluateOptions eo;
          eo.binding_tol = c.binding_tol;
          eo.rank_tol = c.rank_tol;
          eo.uniqueness.seed = c.seed;
          const Eigen::VectorXd load = loads_with(cf, c.loads);
          const OperatorValue val = evaluate(ctx, load, eo);
          j["binding_set"] = binding_json(val.binding);
          const BindingCombo combo = BindingCombo::from(val.binding);
          if (val.binding.count() != cf.network.n_gen() - 1) {
            runner.emit(c, dump(j));
            throw DataStatus{"load point is degenerate: " + val.binding.canonical()};
          }
          sg = combo.gens;
          sb = combo.branches;
        } else {
          sg = parse_indices(gens_opt, cf.network.n_gen(), "generator");
          sb = parse_indices(branches_opt, cf.network.n_edge(), "branch");
        }
        const JacobianMatrix jm = closed_form_jacobian(cf.network, sg, sb, c.rank_tol);
        if (c.format == "csv") {
          runner.emit(c, jacobian_csv(jm));
          return;
        }
        j["provenance"] = to_string(jm.provenance);
        j["combo"] = combo_json(jm.combo);
        j["J"] = mat(jm.J);
        runner.emit(c, dump(j));
      };
    });
  }

  // fd-check
  double fd_step = kDefaultFdStep;
  {
    auto* sub = app.add_subcommand("fd-check", "Compare closed-form, finite-difference and conic Jacobians");
    add_common(sub, c);
    sub->add_option("--step", fd_step, "Central-difference step");
    sub->callback([&] {
      action = [&] {
        const CaseFile cf = load_case(c.case_path);
        const OpfContext ctx = OpfContext::from_case(cf);
        const Eigen::VectorXd load = loads_with(cf, c.loads);
        RegularityOptions ro;
        ro.binding_tol = c.binding_tol;
        ro.rank_tol = c.rank_tol;
        const RegularityReport rep = regularity_report(ctx, load, ro);
        ordered_json j;
        j["binding_set"] = binding_json(rep.binding);
        if (!rep.regular()) {
          runner.emit(c, dump(j));
          throw DataStatus{"load point is not regular: " + rep.binding.canonical()};
        }
        const BindingCombo combo = BindingCombo::from(rep.binding);
        const Eigen::MatrixXd jc =
            closed_form_jacobian(cf.network, combo.gens, combo.branches, c.rank_tol).J;
        const Eigen::MatrixXd jf = fd_jacobian(ctx, load, fd_step, c.binding_tol).J;
        const Eigen::MatrixXd jk = conic_jacobian(ctx, load).J;
        j["closed_form"] = mat(jc);
        j["finite_difference"] = mat(jf);
        j["conic"] = mat(jk);
        j["max_diff"] = {{"closed_vs_fd", (jc - jf).cwiseAbs().maxCoeff()},
                         {"closed_vs_conic", (jc - jk).cwiseAbs().maxCoeff()},
                         {"fd_vs_conic", (jf - jk).cwiseAbs().maxCoeff()}};
        runner.emit(c, dump(j));
      };
    });
  }

  // conic-diff
  std::vector<std::string> dload_opt;
  {
    auto* sub = app.add_subcommand("conic-diff", "Directional derivative of s^g via the self-dual embedding");
    add_common(sub, c);
    sub->add_option("--dload", dload_opt, "Load direction bus=value (others zero)")->expected(1, -1);
    sub->callback([&] {
      action = [&] {
        const CaseFile cf = load_case(c.case_path);
        const OpfContext ctx = OpfContext::from_case(cf);
        const Eigen::VectorXd load = loads_with(cf, c.loads);
        Eigen::VectorXd dload = Eigen::VectorXd::Zero(cf.network.n_load());
        for (const auto& [key, v] : parse_pairs(dload_opt)) dload[load_index(cf, key)] = v;
        const StandardLP lp = assemble_lp(cf.network, cf.cost, cf.limits, load);
        const DispatchSolution sol = solve_lp(lp);
        if (!sol.optimal()) throw Infeasible("OPF has no optimum");
        const ConicProblem p = to_conic(lp);
        const SelfDualPoint pt = embed_from_dispatch(p, sol);
        PerturbationTriple pert = PerturbationTriple::zeros(p.m(), p.n());
        for (int k = 0; k < dload.size(); ++k) pert.db[1 + lp.n_gen + k] = -dload[k];
        const ConicDerivative d = solution_map_derivative(p, pt, pert);
        ordered_json j;
        j["dsg"] = vec(d.dx.head(lp.n_gen));
        j["dtheta"] = vec(d.dx.tail(lp.n_bus));
        j["nondifferentiable"] = d.nondifferentiable;
        j["least_squares"] = d.least_squares;
        j["condition"] = d.condition;
        j["embedding_residual"] = pt.residual;
        runner.emit(c, dump(j));
        if (d.nondifferentiable) throw DataStatus{"projection is not differentiable at this point"};
      };
    });
  }

  // enumerate
  std::size_t max_combos = kDefaultComboBudget;
  {
    auto* sub = app.add_subcommand("enumerate", "List binding combos with independence tags");
    add_common(sub, c, false);
    sub->add_option("--max-combos", max_combos, "Combinatorial budget");
    sub->callback([&] {
      action = [&] {
        check_format(c);
        const CaseFile cf = load_case(c.case_path);
        const auto combos = enumerate_binding_combos(cf.network, max_combos, c.rank_tol);
        if (c.format == "csv") {
          std::ostringstream os;
          os << "S_G,S_B,independent\n";
          for (const auto& cb : combos) {
            for (std::size_t k = 0; k < cb.gens.size(); ++k) os << (k ? " " : "") << cb.gens[k] + 1;
            os << ',';
            for (std::size_t k = 0; k < cb.branches.size(); ++k)
              os << (k ? " " : "") << cb.branches[k] + 1;
            os << ',' << (cb.independent ? "true" : "false") << '\n';
          }
          runner.emit(c, os.str());
          return;
        }
        ordered_json j;
        j["count"] = combos.size();
        j["independent"] = std::count_if(combos.begin(), combos.end(),
                                         [](const BindingCombo& cb) { return cb.independent; });
        ordered_json arr = ordered_json::array();
        for (const auto& cb : combos) arr.push_back(combo_json(cb));
        j["combos"] = arr;
        runner.emit(c, dump(j));
      };
    });
  }

  // sensitivity
  std::string gen_opt, load_bus_opt;
  {
    auto* sub = app.add_subcommand("sensitivity", "Worst-case sensitivity of a generator to a load");
    add_common(sub, c, false);
    sub->add_option("--gen", gen_opt, "Generator bus label (default: all)");
    sub->add_option("--load-bus", load_bus_opt, "Load bus label (default: all)");
    sub->add_option("--max-combos", max_combos, "Combinatorial budget");
    sub->callback([&] {
      action = [&] {
        check_format(c);
        const CaseFile cf = load_case(c.case_path);
        std::vector<WorstCase> table = worst_case_table(cf.network, max_combos);
        if (!gen_opt.empty() || !load_bus_opt.empty()) {
          const int gi = gen_opt.empty() ? -1 : gen_index(cf, gen_opt);
          const int lj = load_bus_opt.empty() ? -1 : load_index(cf, load_bus_opt);
          std::erase_if(table, [&](const WorstCase& w) {
            return (gi >= 0 && w.gen != gi) || (lj >= 0 && w.load != lj);
          });
        }
        if (c.format == "csv") {
          runner.emit(c, worst_case_csv(table));
          return;
        }
        ordered_json arr = ordered_json::array();
        for (const auto& w : table)
          arr.push_back({{"gen", cf.bus_labels[w.gen]},
                         {"load_bus", cf.bus_labels[cf.network.n_gen() + w.load]},
                         {"value", w.value},
                         {"signed_value", w.signed_value},
                         {"S_G", ones_based(w.combo.gens)},
                         {"S_B", ones_based(w.combo.branches)}});
        runner.emit(c, dump(arr.size() == 1 ? arr[0] : arr));
      };
    });
  }

  // construct
  {
    auto* sub = app.add_subcommand("construct", "Build a case whose optimum binds a given combo");
    add_common(sub, c, false);
    sub->add_option("--gens", gens_opt, "Binding generators, 1-based, comma separated");
    sub->add_option("--branches", branches_opt, "Binding branches, 1-based, comma separated");
    sub->callback([&] {
      action = [&] {
        CaseFile cf = load_case(c.case_path);
        const auto sg = parse_indices(gens_opt, cf.network.n_gen(), "generator");
        const auto sb = parse_indices(branches_opt, cf.network.n_edge(), "branch");
        const ConstructedInstance inst =
            construct_parameters_for_binding(cf.network, sg, sb, c.seed);
        cf.name = cf.name + "-constructed-" + BindingCombo{sg, sb, true}.label();
        cf.cost = inst.cost;
        cf.limits = inst.limits;
        cf.base_load = inst.load;
        runner.emit(c, serialize_case(cf));
      };
    });
  }

  // scan-load / scan-limit shared options
  std::string axis_a, axis_b, range_a = "0,7", range_b = "0,7", branch_limits;
  int load_resolution = 200, limit_resolution = 20, threads = 1, branch_opt = 0;
  int limit_samples = 64, path_samples = 50;
  double small_region = kDefaultSmallRegion, degenerate_fraction = 0.05;
  auto add_plane = [&](CLI::App* sub) {
    sub->add_option("--axis-a", axis_a, "First load bus label (default: first load)");
    sub->add_option("--axis-b", axis_b, "Second load bus label (default: second load)");
    sub->add_option("--range-a", range_a, "lo,hi for the first load");
    sub->add_option("--range-b", range_b, "lo,hi for the second load");
    sub->add_option("--threads", threads, "Worker threads");
  };
  auto plane_axes = [&](const CaseFile& cf) {
    const int a = axis_a.empty() ? 0 : load_index(cf, axis_a);
    const int b = axis_b.empty() ? 1 : load_index(cf, axis_b);
    return std::pair{a, b};
  };
  auto branch_index = [&](const CaseFile& cf) {
    if (branch_opt < 1 || branch_opt > cf.network.n_edge())
      throw InvalidInput("--branch out of range");
    return branch_opt - 1;
  };

  {
    auto* sub = app.add_subcommand("scan-load", "Binding-set regions over two loads");
    add_common(sub, c);
    add_plane(sub);
    sub->add_option("--resolution", load_resolution, "Cells per axis")->capture_default_str();
    sub->add_option("--branch", branch_opt, "Branch whose limits --branch-limits overrides");
    sub->add_option("--branch-limits", branch_limits, "p_min,p_max for --branch");
    sub->add_option("--small-region", small_region, "Area fraction below which regions are ignored");
    sub->callback([&] {
      action = [&] {
        check_format(c);
        const CaseFile cf = load_case(c.case_path);
        OpfContext ctx = OpfContext::from_case(cf);
        if (!branch_limits.empty()) {
          const int e = branch_index(cf);
          const auto [lo, hi] = parse_range(branch_limits);
          ctx.limits.p_min[e] = lo;
          ctx.limits.p_max[e] = hi;
          ctx.limits.validate(cf.network.n_gen(), cf.network.n_edge());
        }
        const auto [a, b] = plane_axes(cf);
        const auto [alo, ahi] = parse_range(range_a);
        const auto [blo, bhi] = parse_range(range_b);
        ScanOptions so;
        so.threads = threads;
        so.binding_tol = c.binding_tol;
        so.rank_tol = c.rank_tol;
        const Eigen::VectorXd base = loads_with(cf, c.loads, false);
        const RegionGrid grid = scan_load_plane(
            ctx, base, a, b, Axis{"load " + cf.bus_labels[cf.network.n_gen() + a], alo, ahi, load_resolution},
            Axis{"load " + cf.bus_labels[cf.network.n_gen() + b], blo, bhi, load_resolution}, so);
        runner.emit(c, c.format == "csv" ? grid.to_csv() : grid.to_json(small_region) + "\n");
      };
    });
  }

  std::string lower_range, upper_range;
  {
    auto* sub = app.add_subcommand("scan-limit", "Feasibility and degeneracy over one branch's limits");
    add_common(sub, c);
    add_plane(sub);
    sub->add_option("--branch", branch_opt, "Branch, 1-based")->required();
    sub->add_option("--lower-range", lower_range, "lo,hi for p_min")->required();
    sub->add_option("--upper-range", upper_range, "lo,hi for p_max")->required();
    sub->add_option("--resolution", limit_resolution, "Cells per axis")->capture_default_str();
    sub->add_option("--samples", limit_samples, "Feasible loads sampled per cell")->capture_default_str();
    sub->add_option("--degenerate-fraction", degenerate_fraction,
                    "Irregular sample fraction above which a cell is degenerate");
    sub->callback([&] {
      action = [&] {
        check_format(c);
        const CaseFile cf = load_case(c.case_path);
        const OpfContext ctx = OpfContext::from_case(cf);
        const int e = branch_index(cf);
        const auto [a, b] = plane_axes(cf);
        const auto [alo, ahi] = parse_range(range_a);
        const auto [blo, bhi] = parse_range(range_b);
        const auto [llo, lhi] = parse_range(lower_range);
        const auto [ulo, uhi] = parse_range(upper_range);
        const LoadBox box = LoadBox::plane(loads_with(cf, c.loads, false), a, alo, ahi, b, blo, bhi);
        LimitScanOptions lo;
        lo.threads = threads;
        lo.samples = limit_samples;
        lo.degenerate_fraction = degenerate_fraction;
        lo.seed = c.seed;
        lo.regularity.binding_tol = c.binding_tol;
        lo.regularity.rank_tol = c.rank_tol;
        const RegionGrid grid =
            scan_limit_plane(ctx, box, e, Axis{"p_min", llo, lhi, limit_resolution},
                             Axis{"p_max", ulo, uhi, limit_resolution}, lo);
        runner.emit(c, c.format == "csv" ? grid.to_csv() : grid.to_json() + "\n");
      };
    });
  }

  std::vector<std::string> waypoints;
  {
    auto* sub = app.add_subcommand("path", "Trace the operator along a piecewise-linear load path");
    add_common(sub, c);
    sub->add_option("--waypoint", waypoints, "Waypoint as bus=value,... over the base load")
        ->expected(1, -1)
        ->required();
    sub->add_option("--samples", path_samples, "Samples along the path")->capture_default_str();
    sub->callback([&] {
      action = [&] {
        check_format(c);
        const CaseFile cf = load_case(c.case_path);
        const OpfContext ctx = OpfContext::from_case(cf);
        const Eigen::VectorXd base = loads_with(cf, c.loads, false);
        std::vector<Eigen::VectorXd> pts;
        for (const auto& w : waypoints) {
          Eigen::VectorXd load = base;
          for (const auto& [key, v] : parse_pairs({w})) load[load_index(cf, key)] = v;
          validate_load(load, cf.network.n_load());
          pts.push_back(load);
        }
        const PathTrace trace = trace_load_path(ctx, pts, path_samples, c.binding_tol);
        if (c.format == "csv") {
          runner.emit(c, trace.to_csv());
        } else {
          ordered_json j;
          ordered_json arr = ordered_json::array();
          for (const auto& s : trace.samples) {
            ordered_json o;
            o["t"] = s.t;
            o["load"] = vec(s.load);
            o["status"] = to_string(s.status);
            if (s.status == LpStatus::Optimal) {
              o["sg"] = vec(s.sg);
              o["objective"] = s.objective;
              o["binding_set"] = s.binding.canonical();
            }
            o["region_hash"] = s.hash;
            arr.push_back(o);
          }
          j["samples"] = arr;
          j["region_changes"] = trace.region_changes;
          j["max_affine_residual"] = trace.max_affine_residual();
          runner.emit(c, dump(j));
        }
        for (const auto& s : trace.samples)
          if (s.status != LpStatus::Optimal) throw DataStatus{"path leaves the feasible load set"};
      };
    });
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const DataStatus& s) {
    err << s.message << "\n";
    return kExitInfeasible;
  } catch (const Infeasible& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const MultipleOptima& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const DependentSets& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const SingularCombo& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const RegionBoundary& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const ConstructionFailed& e) {
    err << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace opfgrad
