#pragma once

// Run configuration: a small sectioned key = value format.
//
//   command = optimize            # optimize | efficiency | scenario
//   [model]
//   kind = fedorov                # fedorov | binary | weibull
//   [copula]
//   family = clayton
//   alpha1 = 18
//   [criterion]
//   kind = Ds
//   s = 6
//
// Lines starting with '#' or ';' are comments. Unknown sections and keys are
// rejected. See parse_config for the full key list.

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "copula_oed/copulas.hpp"
#include "copula_oed/design.hpp"
#include "copula_oed/models.hpp"

namespace copula_oed {

enum class Command { Optimize, Efficiency, Scenario };
enum class ModelKind { Fedorov, Binary, Weibull };

struct CopulaConfig {
  Family family = Family::Product;
  double alpha1 = 0.0;
  /// Optional second mixture component and its weight λ₂ (first gets 1 − λ₂).
  std::optional<Family> family2;
  double alpha1_2 = 0.0;
  double weight2 = 0.0;
  /// Optional Khoudraji transform.
  std::optional<std::pair<double, double>> khoudraji;

  friend bool operator==(const CopulaConfig&, const CopulaConfig&) = default;
};

struct ModelConfig {
  ModelKind kind = ModelKind::Fedorov;
  /// Binary τ-matched mixture: pair families, link and localized α₂. When
  /// `pair` is empty the binary model uses the fixed [copula] block.
  std::optional<std::pair<Family, Family>> pair;
  double epsilon = 0.05;
  double tau_max = 0.9;
  double alpha2 = 0.5;
  double x_max = 10.0;
  /// Weibull: Marshall–Olkin unless the [copula] block is a Khoudraji–Clayton.
  bool marshall_olkin = true;
  std::size_t quadrature_order = 64;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct CriterionConfig {
  CriterionKind kind = CriterionKind::D;
  std::size_t s = 0;
  /// DA contrasts, one inner vector per row of A ((k+l)×s).
  std::vector<std::vector<double>> a;

  friend bool operator==(const CriterionConfig&, const CriterionConfig&) = default;
};

struct OptimizerSettings {
  std::size_t grid = 201;
  double delta = 1e-4;
  double weight_floor = 1e-6;
  std::size_t max_iterations = 20000;
  bool polish = true;
  std::size_t refine_factor = 10;

  friend bool operator==(const OptimizerSettings&, const OptimizerSettings&) = default;
};

struct RunConfig {
  Command command = Command::Optimize;
  std::string scenario;  ///< fedorov | binary_tables | weibull
  ModelConfig model;
  CopulaConfig copula;
  CriterionConfig criterion;
  OptimizerSettings optimizer;
  /// Overrides of localized parameter values, by name, in file order.
  std::vector<std::pair<std::string, double>> parameters;
  /// Design compared by the efficiency command, as (x, weight) pairs.
  std::vector<std::pair<double, double>> design;
  std::string output_dir = "out";

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses and validates. Syntax errors carry line and column; semantic errors
/// name the offending field, e.g. "criterion.s" or "copula.alpha1".
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical text form; parse_config(render(c)) == c.
std::string render(const RunConfig& config);

std::unique_ptr<OutcomeModel> build_model(const RunConfig& config);
CopulaSpec build_copula(const CopulaConfig& config);
CriterionSpec build_criterion(const CriterionConfig& config);
ParamVector build_parameters(const RunConfig& config, const OutcomeModel& model);
OptimizerConfig build_optimizer(const OptimizerSettings& settings);

}  // namespace copula_oed
