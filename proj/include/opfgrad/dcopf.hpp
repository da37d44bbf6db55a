#pragma once

#include "opfgrad/case.hpp"
#include "opfgrad/network.hpp"
#include "opfgrad/simplex.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace opfgrad {

/// DC-OPF in standard form over x = [s^g; theta]:
///   min c^T x  s.t.  A_eq x = b_eq,  A_in x <= b_in.
/// Equality rows: [slack angle; N bus balance rows].
/// Inequality rows: [E upper flow; E lower flow; N_G upper gen; N_G lower gen].
struct StandardLP {
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;
  Eigen::MatrixXd A_in;
  Eigen::VectorXd b_in;
  Eigen::VectorXd c;
  int n_gen = 0;
  int n_bus = 0;
  int n_edge = 0;

  int n_vars() const { return n_gen + n_bus; }
  int n_eq() const { return n_bus + 1; }
  int n_in() const { return 2 * n_gen + 2 * n_edge; }
  // First row of each inequality block.
  int row_flow_upper() const { return 0; }
  int row_flow_lower() const { return n_edge; }
  int row_gen_upper() const { return 2 * n_edge; }
  int row_gen_lower() const { return 2 * n_edge + n_gen; }
};

/// Network, cost and limits; everything but the load.
struct OpfContext {
  PowerNetwork net;
  Eigen::VectorXd cost;
  CapacityLimits limits;

  static OpfContext from_case(const CaseFile& c) { return {c.network, c.cost, c.limits}; }
};

StandardLP assemble_lp(const PowerNetwork& net, const Eigen::VectorXd& cost,
                       const CapacityLimits& limits, const Eigen::VectorXd& load);

struct DispatchSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd sg;
  Eigen::VectorXd theta;
  Eigen::VectorXd flows;
  double objective = 0.0;
  /// Equality multipliers in A_eq row order: [slack angle row; bus rows].
  Eigen::VectorXd tau;
  Eigen::VectorXd lambda_plus;
  Eigen::VectorXd lambda_minus;
  Eigen::VectorXd mu_plus;
  Eigen::VectorXd mu_minus;
  /// Final simplex basis over [x; inequality slacks] (artificial indices
  /// beyond that range mark redundant rows).
  std::vector<int> basis;
  /// Reduced costs of [x; inequality slacks] at the final basis.
  Eigen::VectorXd reduced_costs;

  bool optimal() const { return status == LpStatus::Optimal; }
  Eigen::VectorXd x() const;
  /// Inequality multipliers stacked like A_in rows: [mu+; mu-; lambda+; lambda-].
  Eigen::VectorXd inequality_duals() const;
};

/// Solves the LP with the bounded simplex; never throws on infeasible or
/// unbounded data, the status says so.
DispatchSolution solve_lp(const StandardLP& lp, const SimplexOptions& opts = {});

/// assemble_lp followed by solve_lp. Loads are not required to be positive
/// here so that finite-difference probes may step across zero.
DispatchSolution solve_opf(const PowerNetwork& net, const Eigen::VectorXd& cost,
                           const CapacityLimits& limits, const Eigen::VectorXd& load,
                           const SimplexOptions& opts = {});
DispatchSolution solve_opf(const OpfContext& ctx, const Eigen::VectorXd& load,
                           const SimplexOptions& opts = {});

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  /// |primal objective - dual objective|.
  double duality_gap = 0.0;

  double max() const;
};

KktResiduals kkt_residuals(const DispatchSolution& sol, const StandardLP& lp);

enum class Side { Upper, Lower };

const char* to_string(Side s);

struct BoundIndex {
  int index = 0;  // 0-based generator or edge index
  Side side = Side::Upper;

  friend bool operator==(const BoundIndex&, const BoundIndex&) = default;
  friend auto operator<=>(const BoundIndex&, const BoundIndex&) = default;
};

struct BindingSet {
  std::vector<BoundIndex> gens;
  std::vector<BoundIndex> branches;
  /// Rank of [A_eq; binding rows of A_in].
  int rank_certificate = 0;
  /// Set when some generator or branch is within tolerance of both limits.
  bool both_sides_flag = false;

  int count() const { return static_cast<int>(gens.size() + branches.size()); }
  std::vector<int> gen_indices() const;
  std::vector<int> branch_indices() const;
  /// Canonical text form, e.g. "G1L,G3U|B5U" (1-based indices).
  std::string canonical() const;
  /// 64-bit FNV-1a hash of canonical(), as 16 hex digits.
  std::string hash() const;
  bool same_indices(const BindingSet& other) const;
};

inline constexpr double kDefaultBindingTol = 1e-7;
inline constexpr double kDefaultRankTol = 1e-9;

/// Numerical rank: singular values below rel_tol * sigma_max count as zero.
int numeric_rank(const Eigen::MatrixXd& m, double rel_tol = kDefaultRankTol);

BindingSet detect_binding(const DispatchSolution& sol, const StandardLP& lp,
                          const CapacityLimits& limits, double tol = kDefaultBindingTol,
                          double rank_tol = kDefaultRankTol);

enum class Uniqueness { Unique, MultipleSuspected };

const char* to_string(Uniqueness u);

struct UniquenessOptions {
  double reduced_cost_tol = 1e-9;
  double jitter = 1e-9;
  double change_tol = 1e-5;
  std::uint64_t seed = 0x5eed;
};

/// Empirical test for alternative optima: a nonbasic column with zero reduced
/// cost along which the ratio test allows a positive step that moves s^g, or a
/// change of s^g larger than change_tol after a tiny random cost jitter.
Uniqueness uniqueness_probe(const StandardLP& lp, const DispatchSolution& sol,
                            const UniquenessOptions& opts = {});

/// ||mu+||_0 + ||mu-||_0 + ||lambda+||_0 + ||lambda-||_0 with entries above
/// `zero_tol` counted as nonzero.
int multiplier_count(const DispatchSolution& sol, double zero_tol = 1e-9);

}  // namespace opfgrad
