#pragma once

#include "opfgrad/network.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace opfgrad {

/// Generator and branch limits, xi = (sg_max, sg_min, p_max, p_min).
struct CapacityLimits {
  Eigen::VectorXd sg_max;
  Eigen::VectorXd sg_min;
  Eigen::VectorXd p_max;
  Eigen::VectorXd p_min;

  /// Throws InvalidInput unless sg_max > sg_min >= 0 and p_max > p_min, with
  /// lengths n_gen / n_edge.
  void validate(int n_gen, int n_edge) const;

  /// Stacked limit vector xi of length 2 n_gen + 2 n_edge.
  Eigen::VectorXd stacked() const;
};

/// Throws InvalidInput unless `cost` has length n_gen and finite, nonnegative
/// entries.
void validate_cost(const Eigen::VectorXd& cost, int n_gen);

/// Throws InvalidInput unless `load` has length n_load and strictly positive
/// finite entries.
void validate_load(const Eigen::VectorXd& load, int n_load);

/// Network plus the data that parameterize one OPF instance.
struct CaseFile {
  std::string name;
  double mva_base = 100.0;
  PowerNetwork network;
  Eigen::VectorXd cost;
  CapacityLimits limits;
  Eigen::VectorXd base_load;
  /// Original bus label for every internal bus (generators first).
  std::vector<std::string> bus_labels;

  void validate() const;
};

struct RawGenerator {
  double cost = 0.0;
  double sg_min = 0.0;
  double sg_max = 0.0;
};

struct RawBus {
  int id = 0;
  std::optional<RawGenerator> gen;
  std::optional<double> load;
};

struct RawBranch {
  int from = 0;
  int to = 0;
  double susceptance = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
};

/// Bus-oriented description in which a bus may host a generator and a load.
struct RawCase {
  std::string name;
  double mva_base = 100.0;
  std::vector<RawBus> buses;
  std::vector<RawBranch> branches;
};

inline constexpr double kDefaultSplitSusceptance = 1e6;
/// Load assigned to buses that carry neither generation nor demand.
inline constexpr double kTransitBusLoad = 1e-10;

/// Normalizes a raw case to generators-first indexing. Every bus that hosts
/// both a generator and a load becomes a generator bus tied to a fresh load
/// bus through a branch of susceptance `split_susceptance`; the original
/// neighbors stay attached to the load bus. Buses with neither generation nor
/// load are treated as loads of kTransitBusLoad.
CaseFile split_composite_buses(const RawCase& raw,
                               double split_susceptance = kDefaultSplitSusceptance);

/// Parses either the native schema or the raw bus-oriented schema (detected by
/// a top-level "buses" array, then split with the default susceptance).
CaseFile parse_case(const std::string& json_text);
CaseFile load_case(const std::filesystem::path& path);

std::string serialize_case(const CaseFile& c);
void save_case(const CaseFile& c, const std::filesystem::path& path);

}  // namespace opfgrad
