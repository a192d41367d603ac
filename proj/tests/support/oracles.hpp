#pragma once

// Independent reference computations used only by the tests.

#include <cstdint>

#include "copula_oed/models.hpp"

namespace copula_oed::testing {

/// Σ_cells p · (−∇² log p) with the Hessian from nested central differences
/// of raw_cells. Shares no code path with the score-form information.
SymMatrix multinomial_fim_oracle(const DiscreteModel& model, double x, const ParamVector& gamma,
                                 double rel_step = 1e-3);

struct MonteCarloCells {
  CellProbs p;
  /// Standard errors of the four cell frequencies.
  std::array<double, 4> se{};
};

/// Simulates the shared-shock construction of the Marshall–Olkin Weibull
/// model on the y^κ scale and dichotomizes at the cutoffs.
MonteCarloCells marshall_olkin_monte_carlo(const WeibullModel::Rates& rates, double kappa,
                                           double zeta1, double zeta2, std::size_t draws,
                                           std::uint64_t seed);

/// Gaussian straight-line regression η = β₁ + β₂x on [lo, hi] with unit
/// variance; m(x) = f fᵀ with f = (1, x).
class LinearGaussianModel final : public OutcomeModel {
 public:
  explicit LinearGaussianModel(Interval space = {-1.0, 1.0}) : space_(space) {}

  std::string name() const override { return "linear"; }
  std::vector<std::string> parameter_names() const override { return {"beta1", "beta2"}; }
  Interval design_space() const override { return space_; }
  ParamVector nominal() const override { return ParamVector({"beta1", "beta2"}, {0.0, 1.0}); }
  SymMatrix fim(double x, std::span<const double> gamma) const override;

 private:
  Interval space_;
};

}  // namespace copula_oed::testing
