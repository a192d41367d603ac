#pragma once

// Scripted studies: the polynomial regression example, the binary mixture
// tables and the Weibull damage example. Each writes CSV tables, design and
// sensitivity files, and a plain-text manifest.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "copula_oed/design.hpp"

namespace copula_oed {

struct ScenarioOptions {
  /// Empty disables file output.
  std::filesystem::path output_dir;
  std::size_t grid = 201;
  OptimizerConfig optimizer{};
};

/// Writes `content` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct FedorovReport {
  /// D-optimal for the six mean parameters under independence.
  DesignResult product_d;
  /// D_s-optimal for β₁..β₆ under the Clayton copula, α₁ = 18.
  DesignResult clayton_ds;
  /// D_s-efficiency of product_d in the Clayton model.
  double efficiency = 0.0;
  double loss_percent = 0.0;
};
FedorovReport run_fedorov(const ScenarioOptions& options, double alpha1 = 18.0);

struct TauInterval {
  std::string label;
  double tau_max;
};
/// I₁ = [0.05, 0.3], I₂ = [0.05, 0.9], I₃ = [0.05, 0.95].
const std::array<TauInterval, 3>& tau_intervals();
/// C-G, F-G, J-C, J-F in the table order.
const std::array<std::pair<Family, Family>, 4>& binary_pairs();
std::string pair_label(std::pair<Family, Family> pair);

struct BinaryCell {
  std::pair<Family, Family> pair;
  std::string interval;
  double alpha2 = 0.0;
  DesignResult d_optimal;
  DesignResult ds_optimal;
  /// D_s-loss of the D-optimal design, percent.
  double loss_percent = 0.0;
};

struct BinaryTables {
  std::vector<BinaryCell> table1;
  /// loss[true][assumed] in percent for τ ∈ I₂, α̃₂ = 0.5: the D_s-optimal
  /// design of the true model evaluated in the assumed model.
  std::array<std::array<double, 4>, 4> table2{};
};

struct BinaryTablesOptions {
  /// Subset of the sweep; empty means all.
  std::vector<std::pair<Family, Family>> pairs;
  std::vector<std::string> intervals;
  std::vector<double> alpha2s;
  bool table2 = true;
};

BinaryTables run_binary_tables(const ScenarioOptions& options, const BinaryTablesOptions& subset = {});

/// D_s-loss (percent) of `assumed` evaluated in `truth`, relative to the
/// D_s-optimal design of `truth`.
double cross_loss_percent(const OutcomeModel& truth, const ParamVector& gamma,
                          const CriterionSpec& spec, const Design& assumed,
                          const Design& truth_optimal);

struct WeibullSetting {
  std::array<double, 3> alphas{};
  double kendall_tau = 0.0;
  DesignResult d_optimal;
  DesignResult ds_optimal;
  /// D_s-loss on (ν₁, ν₂, α₂, α₃) of the D-optimal design.
  double ds_loss_percent = 0.0;
  /// D-loss of the Marshall–Olkin design when this model is true.
  double loss_weibull_assumed = 0.0;
  /// D-loss of this model's design when the Marshall–Olkin model is true.
  double loss_ours_assumed = 0.0;
};

struct WeibullReport {
  DesignResult marshall_olkin_d;
  std::vector<WeibullSetting> settings;
  double min_weibull_assumed = 0.0;
  double max_weibull_assumed = 0.0;
  double min_ours_assumed = 0.0;
  double max_ours_assumed = 0.0;
};

/// (1.5, 0.4, 0), (2, 0.4, 0.2), (3.6, 0.6, 0).
const std::array<std::array<double, 3>, 3>& weibull_settings();
WeibullReport run_weibull(const ScenarioOptions& options);

}  // namespace copula_oed
