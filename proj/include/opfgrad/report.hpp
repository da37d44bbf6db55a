#pragma once

#include "opfgrad/dcopf.hpp"

#include <string>

namespace opfgrad {

/// JSON dump of a solve: status, primal values, duals by name, binding set
/// and KKT residuals, in a fixed field order. Only the status is emitted for
/// non-optimal solutions.
std::string solution_json(const DispatchSolution& sol, const StandardLP& lp,
                          const CapacityLimits& limits, double binding_tol = kDefaultBindingTol);

}  // namespace opfgrad
