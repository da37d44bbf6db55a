#pragma once

#include "opfgrad/dcopf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace opfgrad {

struct OperatorValue {
  Eigen::VectorXd sg;
  BindingSet binding;
  DispatchSolution solution;
};

struct EvaluateOptions {
  double binding_tol = kDefaultBindingTol;
  double rank_tol = kDefaultRankTol;
  UniquenessOptions uniqueness;
};

/// The OPF operator s^l -> s^g. Throws InvalidInput for nonpositive loads,
/// Infeasible when the LP has no optimum, MultipleOptima when the
/// uniqueness probe finds alternative optima.
OperatorValue evaluate(const OpfContext& ctx, const Eigen::VectorXd& load,
                       const EvaluateOptions& opts = {});

struct RegularityReport {
  int binding_count = 0;
  int expected = 0;
  bool rank_ok = false;
  bool strict_complementarity_ok = false;
  BindingSet binding;

  bool regular() const {
    return binding_count == expected && rank_ok && strict_complementarity_ok;
  }
};

struct RegularityOptions {
  double binding_tol = kDefaultBindingTol;
  double rank_tol = kDefaultRankTol;
  /// Binding multipliers must exceed this.
  double multiplier_tol = 1e-9;
};

/// Checks the binding set of an already solved instance.
RegularityReport regularity_report(const DispatchSolution& sol, const StandardLP& lp,
                                   const CapacityLimits& limits,
                                   const RegularityOptions& opts = {});

/// Solves and checks. Throws Infeasible when the LP has no optimum.
RegularityReport regularity_report(const OpfContext& ctx, const Eigen::VectorXd& load,
                                   const RegularityOptions& opts = {});

struct ConstructedInstance {
  Eigen::VectorXd cost;
  CapacityLimits limits;
  Eigen::VectorXd load;
  /// Target binding set with sides (generators always Lower).
  BindingSet target;
  /// Dispatch the construction pins: 0 on S_G, 1 elsewhere.
  Eigen::VectorXd sg;
  /// Generator capacity scale; always 1 (sg_max = 2).
  double scale = 1.0;
  /// Number of supporting-cost candidates tried (1 = plain normal sum).
  int attempts = 0;

  OpfContext context(const PowerNetwork& net) const { return {net, cost, limits}; }
};

/// Builds (cost, limits, load) whose unique optimum binds exactly the
/// generators `s_gen` at their lower limit and the branches `s_branch` at the
/// side of their realized flow. Throws InvalidInput for wrong sizes,
/// DependentSets when the combo is dependent, ConstructionFailed when no
/// supporting cost passes the round-trip and uniqueness checks.
ConstructedInstance construct_parameters_for_binding(const PowerNetwork& net,
                                                     const std::vector<int>& s_gen,
                                                     const std::vector<int>& s_branch,
                                                     std::uint64_t seed = 0x5eed);

/// cost + U[0, magnitude] per entry, clamped at zero.
Eigen::VectorXd perturb_cost(const Eigen::VectorXd& cost, double magnitude,
                             std::uint64_t seed = 0x5eed);

/// Every bound moved by U[-magnitude, magnitude]. sg_min is clamped at zero,
/// and a pair whose order would flip keeps its original values.
CapacityLimits perturb_limits(const CapacityLimits& limits, double magnitude,
                              std::uint64_t seed = 0x5eed);

}  // namespace opfgrad
