#pragma once

#include "opfgrad/dcopf.hpp"
#include "opfgrad/opf_operator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace opfgrad {

/// Composition of a binding set. The names follow the three-generator case:
/// only generators, mixed, only branches; None is the empty set.
enum class RegionClass { None, TwoGens, GenBranch, TwoBranches };

const char* to_string(RegionClass c);
RegionClass classify(const BindingSet& bs);

enum class CellStatus { Infeasible, Regular, Degenerate };

const char* to_string(CellStatus s);

struct Axis {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int resolution = 1;

  /// Cell-center coordinate of cell k.
  double at(int k) const { return lo + (k + 0.5) * (hi - lo) / resolution; }
};

struct Cell {
  CellStatus status = CellStatus::Infeasible;
  /// Index into RegionGrid::regions for Regular load-plane cells, else -1.
  int region = -1;
};

struct RegionInfo {
  BindingSet binding;
  std::string hash;
  RegionClass cls = RegionClass::None;
  int cells = 0;
  /// Cell count over feasible (Regular + Degenerate) cells.
  double area_fraction = 0.0;
  /// Closed-form Jacobian of the binding combo (empty if dependent).
  Eigen::MatrixXd jacobian;
  /// Coordinates of the first cell found in the region.
  double x = 0.0;
  double y = 0.0;
};

inline constexpr double kDefaultSmallRegion = 1e-3;

struct RegionGrid {
  Axis x;
  Axis y;
  /// Row-major: cells[iy * x.resolution + ix].
  std::vector<Cell> cells;
  /// Ordered by first appearance in row-major cell order.
  std::vector<RegionInfo> regions;

  const Cell& cell(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * x.resolution + ix]; }
  int count(CellStatus s) const;
  int feasible_cells() const { return count(CellStatus::Regular) + count(CellStatus::Degenerate); }
  /// Degenerate cells over feasible cells.
  double degenerate_fraction() const;
  /// Regions whose area fraction is at least `threshold`.
  std::vector<int> significant_regions(double threshold = kDefaultSmallRegion) const;

  /// One row per cell: x,y,status,region_hash,class.
  std::string to_csv() const;
  /// Axes, cell counts and the region table (significant regions flagged).
  std::string to_json(double threshold = kDefaultSmallRegion) const;
};

struct ScanOptions {
  int threads = 1;
  double binding_tol = kDefaultBindingTol;
  double rank_tol = kDefaultRankTol;
};

/// Solves the OPF at every cell center of the (load a, load b) plane; other
/// loads come from `fixed_loads`. Axes are 0-based load indices. Cells with a
/// nonpositive load or no optimum are Infeasible; cells whose binding set has
/// the wrong size or rank are Degenerate.
RegionGrid scan_load_plane(const OpfContext& ctx, const Eigen::VectorXd& fixed_loads,
                           int axis_a, int axis_b, Axis range_a, Axis range_b,
                           const ScanOptions& opts = {});

/// Box of admissible loads for the limit-plane scan; a fixed load has
/// lower == upper.
struct LoadBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// `base` everywhere, [lo, hi] on the two axes.
  static LoadBox plane(const Eigen::VectorXd& base, int axis_a, double lo_a, double hi_a,
                       int axis_b, double lo_b, double hi_b);
};

struct LimitScanOptions {
  int threads = 1;
  /// Feasible loads sampled per cell.
  int samples = 64;
  /// Degenerate when more than this fraction of samples is irregular.
  double degenerate_fraction = 0.05;
  /// Rejection-sampling budget per cell, in multiples of `samples`.
  int attempts_factor = 16;
  std::uint64_t seed = 0x5eed;
  RegularityOptions regularity;
  /// Phase-1 margin t above which positive loads count as feasible.
  double feasibility_tol = 1e-9;
};

/// True when some load in the box with every entry > 0 admits a feasible
/// dispatch. Solved as: max t s.t. OPF constraints, s^l in box, s^l >= t on the
/// free coordinates, t <= 1; fixed coordinates must already be positive.
bool positive_load_feasible(const PowerNetwork& net, const CapacityLimits& limits,
                            const LoadBox& box, double tol = 1e-9);

struct LimitCellProbe {
  CellStatus status = CellStatus::Infeasible;
  int tested = 0;
  int irregular = 0;
};

/// Classifies one (p_min_e, p_max_e) candidate.
LimitCellProbe probe_limit_cell(const OpfContext& ctx, const LoadBox& box, int branch,
                                double p_min, double p_max, const LimitScanOptions& opts,
                                std::uint64_t cell_seed);

/// Cells are (p_min_e, p_max_e) candidates; x varies the lower limit and y
/// the upper one. Cells with p_min >= p_max are Infeasible by definition.
RegionGrid scan_limit_plane(const OpfContext& ctx, const LoadBox& box, int branch,
                            Axis lower_range, Axis upper_range,
                            const LimitScanOptions& opts = {});

struct PathSample {
  double t = 0.0;
  /// Waypoint leg the sample belongs to (the last leg owns t = 1).
  int leg = 0;
  Eigen::VectorXd load;
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd sg;
  double objective = 0.0;
  BindingSet binding;
  std::string hash;
};

struct PathTrace {
  std::vector<PathSample> samples;
  /// Sample indices k with hash(k) != hash(k - 1).
  std::vector<int> region_changes;
  /// Half-open [begin, end) runs sharing region and leg.
  std::vector<std::pair<int, int>> segments;

  /// Largest deviation of s^g from its per-segment least-squares line in t.
  double max_affine_residual() const;
  /// Header t,load...,sg...,objective,region_hash.
  std::string to_csv() const;
};

/// Linear interpolation through `waypoints` at `samples` points spaced evenly
/// in arc length.
PathTrace trace_load_path(const OpfContext& ctx, const std::vector<Eigen::VectorXd>& waypoints,
                          int samples = 50, double binding_tol = kDefaultBindingTol);

}  // namespace opfgrad
