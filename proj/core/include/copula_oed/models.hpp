#pragma once

// Outcome models. Each maps a design point x and a parameter vector γ to a
// bivariate outcome distribution and its single-observation information m(x,γ).

#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "copula_oed/copulas.hpp"
#include "copula_oed/numerics.hpp"

namespace copula_oed {

/// Named parameter values in a fixed model-defined order. The order matters:
/// a D_s subset is always the leading block.
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(std::vector<std::string> names, std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_.at(i); }
  /// Throws DomainError for an unknown name.
  double value(const std::string& name) const;
  std::size_t index(const std::string& name) const;
  ParamVector with(const std::string& name, double value) const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
};

/// Joint probabilities of the four outcome cells. Index 1 marks the event
/// of interest for that component (success, or exceedance of the cutoff).
struct CellProbs {
  double p00 = 0.0;
  double p01 = 0.0;
  double p10 = 0.0;
  double p11 = 0.0;

  std::array<double, 4> array() const { return {p00, p01, p10, p11}; }
  double sum() const { return p00 + p01 + p10 + p11; }
};

class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;

  virtual std::string name() const = 0;
  virtual std::vector<std::string> parameter_names() const = 0;
  std::size_t dimension() const { return parameter_names().size(); }
  virtual Interval design_space() const = 0;
  /// Localized parameter values used by the examples.
  virtual ParamVector nominal() const = 0;

  /// m(x, γ). Throws DomainError for x outside the design space.
  virtual SymMatrix fim(double x, std::span<const double> gamma) const = 0;

 protected:
  void check_point(double x) const;
  void check_gamma(std::span<const double> gamma) const;
};

SymMatrix fim_single(const OutcomeModel& model, double x, const ParamVector& gamma);

/// Models with four outcome cells. The information is the score form
/// Σ (∂p/∂γ)(∂p/∂γ)ᵀ / p over the cells.
class DiscreteModel : public OutcomeModel {
 public:
  /// Unvalidated cell probabilities; may be evaluated slightly outside the
  /// parameter domain by finite differences.
  virtual CellProbs raw_cells(double x, std::span<const double> gamma) const = 0;

  /// raw_cells with roundoff clamping and the simplex check. A cell below
  /// −negative_tolerance() raises ModelError.
  CellProbs cell_probs(double x, std::span<const double> gamma) const;

  /// 4×k Jacobian of (p00, p01, p10, p11) with respect to γ.
  virtual Eigen::MatrixXd cell_jacobian(double x, std::span<const double> gamma) const;

  SymMatrix fim(double x, std::span<const double> gamma) const override;

 protected:
  virtual double negative_tolerance() const { return 1e-12; }
};

// ---------------------------------------------------------------------------

/// Two logistic margins πᵢ = logistic(βᵢ₁ + βᵢ₂x) on [0, x_max] coupled by
/// either a fixed copula or a τ-matched pair mixture α₂C₁ + (1−α₂)C₂ whose
/// τ follows the logistic link with slope α₁.
///
/// Mixture layout: (alpha2, beta11, beta12, beta21, beta22, alpha1).
/// Fixed-copula layout: (beta11, beta12, beta21, beta22).
class BinaryLogitModel final : public DiscreteModel {
 public:
  static BinaryLogitModel mixture(Family first, Family second, TauLink link, double alpha2);
  static BinaryLogitModel fixed(CopulaSpec copula, double x_max = 10.0);

  std::string name() const override;
  std::vector<std::string> parameter_names() const override;
  Interval design_space() const override { return {0.0, x_max_}; }
  ParamVector nominal() const override;

  CellProbs raw_cells(double x, std::span<const double> gamma) const override;
  /// Analytic in the margins and α₂; the α₁ column differentiates the
  /// τ-inverse maps numerically.
  Eigen::MatrixXd cell_jacobian(double x, std::span<const double> gamma) const override;

  bool is_mixture() const noexcept { return mixture_; }
  /// Copula in effect at x.
  CopulaSpec copula_at(double x, std::span<const double> gamma) const;

 private:
  BinaryLogitModel() = default;

  bool mixture_ = false;
  Family first_ = Family::Product;
  Family second_ = Family::Product;
  double epsilon_ = 0.05;
  double x_max_ = 10.0;
  double alpha1_ = 0.0;
  double alpha2_ = 0.5;
  CopulaSpec fixed_ = BaseCopula::product();
};

/// Bivariate polynomial regression with unit-variance Gaussian margins,
/// η₁ = β₁ + β₂x + β₃x², η₂ = β₄x + β₅x³ + β₆x⁴ on [0,1], and a one-parameter
/// copula. Layout (beta1..beta6, alpha1); the Product copula drops alpha1.
class FedorovModel final : public OutcomeModel {
 public:
  explicit FedorovModel(BaseCopula copula, std::size_t quadrature_order = 64);

  std::string name() const override;
  std::vector<std::string> parameter_names() const override;
  Interval design_space() const override { return {0.0, 1.0}; }
  ParamVector nominal() const override;

  SymMatrix fim(double x, std::span<const double> gamma) const override;

  /// Information per observation in the (η₁, η₂, α₁) coordinates.
  const Eigen::MatrixXd& kernel() const noexcept { return kernel_; }
  /// Same quantity for an arbitrary copula parameter.
  Eigen::MatrixXd kernel_for(double alpha1) const;

 private:
  BaseCopula copula_;
  std::size_t order_;
  Eigen::MatrixXd kernel_;
};

enum class WeibullDependence { MarshallOlkin, KhoudrajiClayton };

/// Damage of two components with Weibull-type margins, dichotomized at the
/// cutoffs (ζ₁, ζ₂). Rates follow −log(β₃+β₅) = θ₀+θ₁x, −log(β₃+β₄) = θ₀+θ₂x,
/// −log(β₁+β₂+β₃) = θ₀+θ₃x with θ₁ = θ₂+ν₁ and β₁ = β₂+ν₂.
///
/// Marshall–Olkin layout: (nu1, nu2, theta0, theta2, theta3, beta2, kappa).
/// Khoudraji–Clayton layout: (nu1, nu2, alpha2, alpha3, theta0, theta2, theta3,
/// beta2, kappa, alpha1).
class WeibullModel final : public DiscreteModel {
 public:
  struct Rates {
    double beta1, beta2, beta3, beta4, beta5;
    /// β₃+β₅, β₃+β₄ and β₁+β₂+β₃.
    double s1, s2, s3;
  };

  static WeibullModel marshall_olkin(std::size_t quadrature_order = 32);
  static WeibullModel khoudraji_clayton(double alpha1, double alpha2, double alpha3);

  std::string name() const override;
  std::vector<std::string> parameter_names() const override;
  Interval design_space() const override { return {0.0, 1.0}; }
  ParamVector nominal() const override;
  WeibullDependence dependence() const noexcept { return dependence_; }
  std::array<double, 2> cutoffs() const noexcept { return {zeta1_, zeta2_}; }

  CellProbs raw_cells(double x, std::span<const double> gamma) const override;

  Rates rates(double x, std::span<const double> gamma) const;
  /// P(Y ≥ y) and P(Z ≥ z) from the weighted Weibull survival formulas.
  double survival_y(double y, double kappa, const Rates& r) const;
  double survival_z(double z, double kappa, const Rates& r) const;

 protected:
  double negative_tolerance() const override { return 1e-9; }

 private:
  WeibullModel() = default;

  WeibullDependence dependence_ = WeibullDependence::MarshallOlkin;
  double zeta1_ = 0.8;
  double zeta2_ = 0.7;
  std::array<double, 3> alphas_{};
  QuadratureRule rule_;
};

/// Memoizes fim() of another model by (x, γ). Thread-safe. The wrapped
/// model must outlive the cache.
class CachedModel final : public OutcomeModel {
 public:
  explicit CachedModel(const OutcomeModel& base) : base_(base) {}

  std::string name() const override { return base_.name(); }
  std::vector<std::string> parameter_names() const override { return base_.parameter_names(); }
  Interval design_space() const override { return base_.design_space(); }
  ParamVector nominal() const override { return base_.nominal(); }
  SymMatrix fim(double x, std::span<const double> gamma) const override;

  std::size_t cached() const;

 private:
  const OutcomeModel& base_;
  mutable std::mutex mutex_;
  mutable std::map<std::vector<double>, SymMatrix> cache_;
};

}  // namespace copula_oed
