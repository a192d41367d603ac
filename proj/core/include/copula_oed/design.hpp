#pragma once

// Approximate designs, information matrices, D / D_A / D_s criteria, the
// equivalence-theorem sensitivity function and a weight optimizer.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "copula_oed/models.hpp"
#include "copula_oed/numerics.hpp"

namespace copula_oed {

/// Finite support points with nonnegative weights summing to 1.
class Design {
 public:
  Design() = default;
  /// Weights within 1e-9 of summing to 1 are renormalized exactly; points
  /// closer than 1e-9 are merged. Throws DomainError otherwise.
  Design(std::vector<double> points, std::vector<double> weights);
  static Design uniform(std::span<const double> points);

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<double>& points() const noexcept { return points_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  friend bool operator==(const Design&, const Design&) = default;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
};

enum class CriterionKind { D, DA, Ds };

class CriterionSpec {
 public:
  static CriterionSpec d() { return CriterionSpec(CriterionKind::D, 0, {}); }
  /// Contrasts Aᵀγ with A of shape (k+l)×s and full column rank.
  static CriterionSpec da(Eigen::MatrixXd a);
  /// The leading s parameters.
  static CriterionSpec ds(std::size_t s);

  CriterionKind kind() const noexcept { return kind_; }
  std::size_t subset() const noexcept { return s_; }
  const Eigen::MatrixXd& contrasts() const noexcept { return a_; }

  /// Sensitivity bound: k+l for D, s otherwise.
  double bound(std::size_t dim) const;
  /// Throws DomainError when the spec does not fit a dim-parameter model.
  void validate(std::size_t dim) const;
  std::string describe() const;

 private:
  CriterionSpec(CriterionKind kind, std::size_t s, Eigen::MatrixXd a)
      : kind_(kind), s_(s), a_(std::move(a)) {}

  CriterionKind kind_;
  std::size_t s_;
  Eigen::MatrixXd a_;
};

SymMatrix info_matrix(const OutcomeModel& model, const Design& design, const ParamVector& gamma);

/// D: log det M. DA: −log det(Aᵀ M⁻¹ A). Ds: log det of the Schur complement.
double criterion_value(const SymMatrix& m, const CriterionSpec& spec);

/// Q with sensitivity(x) = ⟨Q, m(x)⟩: M⁻¹ for D, M⁻¹A(AᵀM⁻¹A)⁻¹AᵀM⁻¹ for
/// DA, M⁻¹ − diag(0, M₂₂⁻¹) for Ds.
SymMatrix sensitivity_kernel(const SymMatrix& m, const CriterionSpec& spec);

/// tr(Q m) for symmetric Q and m.
double trace_product(const SymMatrix& q, const SymMatrix& m);

double sensitivity(const OutcomeModel& model, double x, const Design& design,
                   const ParamVector& gamma, const CriterionSpec& spec);

/// (det ratio)^(1/s) of ξ against ξ*, with s the sensitivity bound.
double efficiency(const SymMatrix& m, const SymMatrix& m_star, const CriterionSpec& spec);
double efficiency(const OutcomeModel& model, const Design& xi, const Design& xi_star,
                  const ParamVector& gamma, const CriterionSpec& spec);

std::vector<double> uniform_grid(Interval domain, std::size_t n);

/// m(x, γ) at every x, evaluated as a pure map that may run concurrently.
std::vector<SymMatrix> candidate_fims(const OutcomeModel& model, std::span<const double> xs,
                                      const ParamVector& gamma);

struct OptimizerConfig {
  double delta = 1e-4;           ///< converge when max sensitivity ≤ bound·(1+δ)
  double weight_floor = 1e-6;    ///< weights below this are dropped
  double damping = 1.0;          ///< exponent of the multiplicative update
  std::size_t max_iterations = 20000;
  bool polish = true;            ///< refine support points off the grid
  std::size_t polish_rounds = 4;
  std::size_t refine_factor = 10;  ///< certificate grid refinement
};

struct SensitivitySample {
  double x = 0.0;
  double value = 0.0;
};

struct Certificate {
  std::size_t grid_size = 0;
  double max_sensitivity = 0.0;
  double argmax = 0.0;
  /// Σ wᵢ sensitivity(xᵢ), equal to the bound for any design.
  double weighted_sum = 0.0;
  bool passed = false;
};

struct DesignResult {
  Design design;
  CriterionSpec spec = CriterionSpec::d();
  double criterion_value = 0.0;
  double bound = 0.0;
  double max_sensitivity = 0.0;
  std::vector<SensitivitySample> sensitivity_samples;
  std::size_t iterations = 0;
  bool converged = false;
  /// Criterion value after every iteration, in order.
  std::vector<double> history;
  Certificate certificate;
};

/// Weight optimization over a fixed candidate set.
struct WeightResult {
  std::vector<double> weights;
  std::vector<double> sensitivities;
  double criterion_value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> history;
};

/// Alternates a vertex-exchange step toward the most sensitive candidate,
/// exchanges between neighbouring support points, a multiplicative update
/// and purging of negligible weights. Every step is accepted only if the
/// criterion does not decrease. `initial` may be empty (uniform start).
WeightResult optimize_weights(std::span<const SymMatrix> fims, const CriterionSpec& spec,
                              const OptimizerConfig& cfg, std::span<const double> initial = {});

DesignResult optimize_design(const OutcomeModel& model, const ParamVector& gamma,
                             const CriterionSpec& spec, std::span<const double> grid,
                             const OptimizerConfig& cfg = {});

/// Re-checks the sensitivity bound on a grid `refine_factor` times finer
/// than an n-point grid on the design space, plus the support points.
Certificate check_certificate(const OutcomeModel& model, const ParamVector& gamma,
                              const CriterionSpec& spec, const Design& design,
                              std::size_t grid_points, std::size_t refine_factor, double delta);

/// "x,weight" rows.
std::string design_csv(const Design& design);
/// "x,sensitivity,bound" rows.
std::string sensitivity_csv(const DesignResult& result);

}  // namespace copula_oed
