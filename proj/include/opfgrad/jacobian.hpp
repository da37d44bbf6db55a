#pragma once

#include "opfgrad/dcopf.hpp"
#include "opfgrad/network.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace opfgrad {

/// Index sets of binding generators and branches (0-based, sides dropped).
struct BindingCombo {
  std::vector<int> gens;
  std::vector<int> branches;
  bool independent = false;

  /// "G2|B5,B9" style label with 1-based indices.
  std::string label() const;
  static BindingCombo from(const BindingSet& bs);
};

enum class Provenance { ClosedForm, FiniteDifference, Conic };

const char* to_string(Provenance p);

/// dsg/dsl, n_gen x n_load.
struct JacobianMatrix {
  Eigen::MatrixXd J;
  Provenance provenance = Provenance::ClosedForm;
  /// Set for ClosedForm.
  BindingCombo combo;
  /// Set for FiniteDifference.
  double step = 0.0;
};

/// (N + N_G) square matrix of the linearized optimality system:
///   [-I, I_VG L; 0, I_VL L; I_SG, 0; 0, I_SB B C^T; 0, e1^T].
/// Throws InvalidInput unless |S_G| + |S_B| = N_G - 1.
Eigen::MatrixXd assemble_H(const PowerNetwork& net, const std::vector<int>& s_gen,
                           const std::vector<int>& s_branch);

/// N x N matrix R^T = [I_VL L; I_SG L; I_SB B C^T; e1^T]. Invertible exactly
/// when the combo is independent.
Eigen::MatrixXd assemble_R(const PowerNetwork& net, const std::vector<int>& s_gen,
                           const std::vector<int>& s_branch);

bool is_independent(const PowerNetwork& net, const std::vector<int>& s_gen,
                    const std::vector<int>& s_branch, double rank_tol = kDefaultRankTol);

/// J = -H1 (I^N_[N_L])^T with H1 = I_VG L (R^T)^{-1}. Throws SingularCombo
/// for dependent combos.
JacobianMatrix closed_form_jacobian(const PowerNetwork& net, const std::vector<int>& s_gen,
                                    const std::vector<int>& s_branch,
                                    double rank_tol = kDefaultRankTol);

inline constexpr double kDefaultFdStep = 1e-6;

/// Central differences of the OPF operator. Throws Infeasible when the
/// center or a probe is infeasible, RegionBoundary when a probe changes the
/// binding set. Loads are not required to be positive.
JacobianMatrix fd_jacobian(const OpfContext& ctx, const Eigen::VectorXd& load,
                           double step = kDefaultFdStep,
                           double binding_tol = kDefaultBindingTol);

inline constexpr std::size_t kDefaultComboBudget = 1000000;

/// All (S_G, S_B) with |S_G| + |S_B| = N_G - 1, ordered by |S_G| descending,
/// then lexicographically by indices. Throws BudgetExceeded when the
/// candidate count exceeds `max_combos`.
std::vector<BindingCombo> enumerate_binding_combos(const PowerNetwork& net,
                                                   std::size_t max_combos = kDefaultComboBudget,
                                                   double rank_tol = kDefaultRankTol);

struct WorstCase {
  int gen = 0;   // 0-based
  int load = 0;  // 0-based load index
  double value = 0.0;
  /// J_ij of the argmax combo (value = |signed_value|).
  double signed_value = 0.0;
  BindingCombo combo;
};

/// max over independent combos of |J_ij|; ties keep the first combo in
/// enumeration order.
WorstCase worst_case_sensitivity(const PowerNetwork& net, int gen, int load,
                                 std::size_t max_combos = kDefaultComboBudget);

/// Worst case for every (gen, load) pair from a single enumeration, gen-major.
std::vector<WorstCase> worst_case_table(const PowerNetwork& net,
                                        std::size_t max_combos = kDefaultComboBudget);

/// One row per generator, comma separated, %.17g.
std::string jacobian_csv(const JacobianMatrix& j);

/// Header "i,j,value,S_G,S_B"; indices 1-based, sets space separated.
std::string worst_case_csv(const std::vector<WorstCase>& table);

}  // namespace opfgrad
