#include "opfgrad/report.hpp"

#include <json.hpp>

#include <vector>

namespace opfgrad {

namespace {

using nlohmann::ordered_json;

ordered_json vec(const Eigen::VectorXd& v) {
  // Adding 0.0 turns -0.0 into 0.0.
  const Eigen::VectorXd clean = v.array() + 0.0;
  return ordered_json(std::vector<double>(clean.data(), clean.data() + clean.size()));
}

ordered_json bounds(const std::vector<BoundIndex>& items) {
  ordered_json arr = ordered_json::array();
  for (const auto& it : items) arr.push_back({{"index", it.index + 1}, {"side", to_string(it.side)}});
  return arr;
}

}  // namespace

std::string solution_json(const DispatchSolution& sol, const StandardLP& lp,
                          const CapacityLimits& limits, double binding_tol) {
  ordered_json j;
  j["status"] = to_string(sol.status);
  if (sol.optimal()) {
    j["sg"] = vec(sol.sg);
    j["theta"] = vec(sol.theta);
    j["flows"] = vec(sol.flows);
    j["objective"] = sol.objective;
    j["duals"] = {{"tau", vec(sol.tau)},
                  {"lambda_plus", vec(sol.lambda_plus)},
                  {"lambda_minus", vec(sol.lambda_minus)},
                  {"mu_plus", vec(sol.mu_plus)},
                  {"mu_minus", vec(sol.mu_minus)}};
    const BindingSet bs = detect_binding(sol, lp, limits, binding_tol);
    j["binding_set"] = {{"canonical", bs.canonical()},
                        {"hash", bs.hash()},
                        {"gens", bounds(bs.gens)},
                        {"branches", bounds(bs.branches)},
                        {"rank_certificate", bs.rank_certificate},
                        {"both_sides_flag", bs.both_sides_flag}};
    const KktResiduals r = kkt_residuals(sol, lp);
    j["residuals"] = {{"stationarity", r.stationarity},
                      {"primal", r.primal},
                      {"dual", r.dual},
                      {"complementarity", r.complementarity},
                      {"duality_gap", r.duality_gap}};
  }
  return j.dump(2);
}

}  // namespace opfgrad
